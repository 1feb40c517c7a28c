#include "rotseq/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "rotseq/error.hpp"

namespace rotseq {

DenseMatrix accumulate_Q(const RotationSequence& seq, TransformKind kind) {
  const std::size_t n = seq.n();
  DenseMatrix q = DenseMatrix::identity(n);
  // Written out here rather than calling apply_naive, so the oracle shares no
  // code with the variants it checks.
  for (std::size_t p = 0; p < seq.k(); ++p) {
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double c = seq.c(j, p);
      const double s = seq.s(j, p);
      for (std::size_t i = 0; i < n; ++i) {
        const double x = q(i, j);
        const double y = q(i, j + 1);
        if (kind == TransformKind::Rotation) {
          q(i, j) = c * x + s * y;
          q(i, j + 1) = -s * x + c * y;
        } else {
          q(i, j) = c * x + s * y;
          q(i, j + 1) = s * x - c * y;
        }
      }
    }
  }
  return q;
}

DenseMatrix reference_multiply(const MatrixView& a, const MatrixView& q) {
  if (a.cols != q.rows) {
    throw UsageError("inner dimensions differ: " + std::to_string(a.cols) + " vs " +
                     std::to_string(q.rows));
  }
  DenseMatrix out(a.rows, q.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < q.cols; ++j) {
      double acc = 0;
      for (std::size_t l = 0; l < a.cols; ++l) acc += a(i, l) * q(l, j);
      out(i, j) = acc;
    }
  }
  return out;
}

ComparisonReport compare(const MatrixView& x, const MatrixView& y) {
  if (x.rows != y.rows || x.cols != y.cols) {
    throw UsageError("shape mismatch: " + std::to_string(x.rows) + "x" + std::to_string(x.cols) +
                     " vs " + std::to_string(y.rows) + "x" + std::to_string(y.cols));
  }
  ComparisonReport r;
  std::vector<double> row_norm(y.rows, 0.0);
  double diff2 = 0, ref2 = 0;
  for (std::size_t j = 0; j < y.cols; ++j) {
    for (std::size_t i = 0; i < y.rows; ++i) row_norm[i] += y(i, j) * y(i, j);
  }
  for (auto& v : row_norm) v = std::sqrt(v);
  for (std::size_t j = 0; j < x.cols; ++j) {
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double a = x(i, j);
      const double b = y(i, j);
      if (std::memcmp(&a, &b, sizeof(double)) != 0) r.bitwise_equal = false;
      const double d = std::abs(a - b);
      r.max_abs_diff = std::max(r.max_abs_diff, d);
      if (row_norm[i] > 0) r.max_rel_diff = std::max(r.max_rel_diff, d / row_norm[i]);
      else if (d > 0) r.max_rel_diff = std::numeric_limits<double>::infinity();
      diff2 += d * d;
      ref2 += b * b;
    }
  }
  if (ref2 > 0) r.frobenius_rel_diff = std::sqrt(diff2 / ref2);
  else if (diff2 > 0) r.frobenius_rel_diff = std::numeric_limits<double>::infinity();
  return r;
}

double fast_tolerance(std::size_t k) {
  return 16.0 * static_cast<double>(std::max<std::size_t>(k, 1)) *
         std::numeric_limits<double>::epsilon();
}

bool passes(const ComparisonReport& r, TolProfile profile, std::size_t k) {
  if (profile == TolProfile::Strict) return r.bitwise_equal;
  const double tol = fast_tolerance(k);
  return r.frobenius_rel_diff <= tol && r.max_rel_diff <= tol;
}

double orthogonality_defect(const DenseMatrix& q) {
  double worst = 0;
  for (std::size_t a = 0; a < q.cols(); ++a) {
    for (std::size_t b = 0; b < q.cols(); ++b) {
      double dot = 0;
      for (std::size_t i = 0; i < q.rows(); ++i) dot += q(i, a) * q(i, b);
      worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

}  // namespace rotseq
