#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rotseq {

/// Read-only window onto paired cosine/sine matrices (column-major, shared ld).
struct CoeffView {
  const double* c = nullptr;
  const double* s = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t ld = 0;

  double cos(std::size_t j, std::size_t p) const { return c[j + p * ld]; }
  double sin(std::size_t j, std::size_t p) const { return s[j + p * ld]; }
  const double* cos_col(std::size_t p) const { return c + p * ld; }
  const double* sin_col(std::size_t p) const { return s + p * ld; }

  /// Throws UsageError when out of range.
  CoeffView block(std::size_t j0, std::size_t p0, std::size_t nrows, std::size_t ncols) const;
};

/// k sequences of n-1 transforms acting on n matrix columns. Entry (j, p)
/// acts on columns j, j+1 during sequence p. C and S are (n-1) x k column-major.
class RotationSequence {
 public:
  /// All-identity sequence (c = 1, s = 0).
  RotationSequence(std::size_t n, std::size_t k);
  /// User-supplied coefficients. With check_orthonormal, every pair must
  /// satisfy |c^2 + s^2 - 1| <= 1e-12 or UsageError is thrown.
  RotationSequence(std::size_t n, std::size_t k, std::vector<double> c, std::vector<double> s,
                   bool check_orthonormal = true);

  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  std::size_t pairs() const { return n_ - 1; }
  std::size_t count() const { return (n_ - 1) * k_; }

  double c(std::size_t j, std::size_t p) const { return c_[j + p * (n_ - 1)]; }
  double s(std::size_t j, std::size_t p) const { return s_[j + p * (n_ - 1)]; }
  void set(std::size_t j, std::size_t p, double c, double s);

  const std::vector<double>& cosines() const { return c_; }
  const std::vector<double>& sines() const { return s_; }
  CoeffView view() const { return {c_.data(), s_.data(), n_ - 1, k_, n_ - 1}; }

  /// Largest |c^2 + s^2 - 1| over all entries.
  double orthonormality_defect() const;
  bool is_orthonormal(double tol = 1e-12) const { return orthonormality_defect() <= tol; }

 private:
  std::size_t n_;
  std::size_t k_;
  std::vector<double> c_;
  std::vector<double> s_;
};

/// Deterministic sequence: theta uniform in [0, 2 pi) from a counter-based
/// generator keyed by (seed, p * (n-1) + j); c = cos theta, s = sin theta.
RotationSequence generate_sequence(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace rotseq
