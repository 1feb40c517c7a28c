#include "rotseq/sequence.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rotseq/error.hpp"
#include "rotseq/matrix.hpp"

namespace rotseq {

CoeffView CoeffView::block(std::size_t j0, std::size_t p0, std::size_t nrows,
                           std::size_t ncols) const {
  if (j0 + nrows > rows || p0 + ncols > cols) {
    throw UsageError("coefficient block exceeds " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  return {c + j0 + p0 * ld, s + j0 + p0 * ld, nrows, ncols, ld};
}

namespace {

void require_columns(std::size_t n) {
  if (n < 2) {
    throw UsageError("a rotation sequence needs n >= 2 columns, got " + std::to_string(n));
  }
}

}  // namespace

RotationSequence::RotationSequence(std::size_t n, std::size_t k) : n_(n), k_(k) {
  require_columns(n);
  c_.assign((n - 1) * k, 1.0);
  s_.assign((n - 1) * k, 0.0);
}

RotationSequence::RotationSequence(std::size_t n, std::size_t k, std::vector<double> c,
                                   std::vector<double> s, bool check_orthonormal)
    : n_(n), k_(k), c_(std::move(c)), s_(std::move(s)) {
  require_columns(n);
  const std::size_t expected = (n - 1) * k;
  if (c_.size() != expected || s_.size() != expected) {
    throw UsageError("C and S must both hold (n-1)*k = " + std::to_string(expected) +
                     " entries (got " + std::to_string(c_.size()) + ", " +
                     std::to_string(s_.size()) + ")");
  }
  if (check_orthonormal && !is_orthonormal()) {
    throw UsageError("sequence is not orthonormal: max |c^2+s^2-1| = " +
                     std::to_string(orthonormality_defect()));
  }
}

void RotationSequence::set(std::size_t j, std::size_t p, double c, double s) {
  if (j >= n_ - 1 || p >= k_) throw UsageError("rotation index out of range");
  c_[j + p * (n_ - 1)] = c;
  s_[j + p * (n_ - 1)] = s;
}

double RotationSequence::orthonormality_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < c_.size(); ++i) {
    worst = std::max(worst, std::abs(c_[i] * c_[i] + s_[i] * s_[i] - 1.0));
  }
  return worst;
}

RotationSequence generate_sequence(std::size_t n, std::size_t k, std::uint64_t seed) {
  require_columns(n);
  if (k < 1) throw UsageError("generate_sequence needs k >= 1");
  RotationSequence seq(n, k);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double theta =
          2.0 * std::numbers::pi * counter_uniform(seed, 0x524f544154450000ULL, p * (n - 1) + j);
      seq.set(j, p, std::cos(theta), std::sin(theta));
    }
  }
  return seq;
}

}  // namespace rotseq
