#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rotseq {

/// Non-owning column-major view with explicit leading dimension.
struct MatrixView {
  double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t ld = 0;

  double* col(std::size_t j) const { return data + j * ld; }
  double& operator()(std::size_t i, std::size_t j) const { return data[i + j * ld]; }

  /// Sub-block starting at (row0, col0). Throws UsageError when out of range.
  MatrixView block(std::size_t row0, std::size_t col0, std::size_t nrows,
                   std::size_t ncols) const;
  MatrixView row_slice(std::size_t row0, std::size_t nrows) const {
    return block(row0, 0, nrows, cols);
  }
};

/// Owning column-major m x n matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  /// ld >= rows; the padding rows are zero-initialised and never touched.
  DenseMatrix(std::size_t rows, std::size_t cols, std::size_t ld);

  static DenseMatrix identity(std::size_t n);
  /// Entries uniform in [-1, 1), deterministic in seed.
  static DenseMatrix random(std::size_t rows, std::size_t cols, std::uint64_t seed);
  /// Copy the live region of a view into a fresh matrix with ld == rows.
  static DenseMatrix copy_of(const MatrixView& v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t ld() const { return ld_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i + j * ld_]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i + j * ld_]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  MatrixView view() { return {data_.data(), rows_, cols_, ld_}; }
  /// Read-only callers still receive a MatrixView; they must not write through it.
  MatrixView view() const {
    return {const_cast<double*>(data_.data()), rows_, cols_, ld_};
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t ld_ = 0;
  std::vector<double> data_;
};

/// SplitMix64 finaliser; the building block of the counter-based generators.
std::uint64_t splitmix64(std::uint64_t x);
/// Uniform double in [0, 1) from (seed, stream, counter).
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

}  // namespace rotseq
