#include "rotseq/matrix.hpp"

#include <algorithm>
#include <string>

#include "rotseq/error.hpp"

namespace rotseq {

MatrixView MatrixView::block(std::size_t row0, std::size_t col0, std::size_t nrows,
                             std::size_t ncols) const {
  if (row0 + nrows > rows || col0 + ncols > cols) {
    throw UsageError("matrix block [" + std::to_string(row0) + "+" + std::to_string(nrows) +
                     ", " + std::to_string(col0) + "+" + std::to_string(ncols) +
                     "] exceeds " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  return {data + row0 + col0 * ld, nrows, ncols, ld};
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols) : DenseMatrix(rows, cols, rows) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::size_t ld)
    : rows_(rows), cols_(cols), ld_(std::max<std::size_t>(ld, 1)) {
  if (ld < rows) {
    throw UsageError("leading dimension " + std::to_string(ld) + " < rows " +
                     std::to_string(rows));
  }
  data_.assign(ld_ * cols_, 0.0);
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix q(n, n);
  for (std::size_t i = 0; i < n; ++i) q(i, i) = 1.0;
  return q;
}

DenseMatrix DenseMatrix::random(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  DenseMatrix a(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      a(i, j) = 2.0 * counter_uniform(seed, 0x4d41545249580000ULL, j * rows + i) - 1.0;
    }
  }
  return a;
}

DenseMatrix DenseMatrix::copy_of(const MatrixView& v) {
  DenseMatrix a(v.rows, v.cols);
  for (std::size_t j = 0; j < v.cols; ++j) {
    std::copy_n(v.col(j), v.rows, a.data() + j * a.ld());
  }
  return a;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t key = splitmix64(seed ^ splitmix64(stream));
  const std::uint64_t bits = splitmix64(key + splitmix64(counter));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace rotseq
