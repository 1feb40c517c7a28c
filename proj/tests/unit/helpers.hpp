#pragma once

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "rotseq/matrix.hpp"
#include "rotseq/sequence.hpp"
#include "rotseq/types.hpp"

namespace testutil {

inline constexpr double eps = std::numeric_limits<double>::epsilon();

inline bool same_bits(const rotseq::DenseMatrix& a, const rotseq::DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double x = a(i, j), y = b(i, j);
      if (std::memcmp(&x, &y, sizeof(double)) != 0) return false;
    }
  return true;
}

// Explicit n x n plane transform for (j, c, s), acting from the right.
inline std::vector<double> plane(std::size_t n, std::size_t j, double c, double s,
                                 rotseq::TransformKind kind) {
  std::vector<double> g(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) g[i + i * n] = 1.0;
  // columns: x' = c x + s y ; y' = -s x + c y   (rotation)
  //          x' = c x + s y ; y' = s x - c y    (reflector)
  g[j + j * n] = c;
  g[j + 1 + j * n] = s;
  if (kind == rotseq::TransformKind::Rotation) {
    g[j + (j + 1) * n] = -s;
    g[j + 1 + (j + 1) * n] = c;
  } else {
    g[j + (j + 1) * n] = s;
    g[j + 1 + (j + 1) * n] = -c;
  }
  return g;
}

// A times each explicit plane matrix in naive order, in long double.
inline rotseq::DenseMatrix brute_force(const rotseq::DenseMatrix& a,
                                       const rotseq::RotationSequence& seq,
                                       rotseq::TransformKind kind) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<long double> cur(m * n), next(m * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) cur[i + j * m] = a(i, j);
  for (std::size_t p = 0; p < seq.k(); ++p) {
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const auto g = plane(n, j, seq.c(j, p), seq.s(j, p), kind);
      for (std::size_t col = 0; col < n; ++col)
        for (std::size_t i = 0; i < m; ++i) {
          long double acc = 0;
          for (std::size_t t = 0; t < n; ++t) acc += cur[i + t * m] * g[t + col * n];
          next[i + col * m] = acc;
        }
      cur.swap(next);
    }
  }
  rotseq::DenseMatrix out(m, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) out(i, j) = static_cast<double>(cur[i + j * m]);
  return out;
}

inline double max_abs_diff(const rotseq::DenseMatrix& a, const rotseq::DenseMatrix& b) {
  double d = 0;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) d = std::max(d, std::abs(a(i, j) - b(i, j)));
  return d;
}

inline double row_norm(const rotseq::DenseMatrix& a, std::size_t i) {
  long double s = 0;
  for (std::size_t j = 0; j < a.cols(); ++j) s += static_cast<long double>(a(i, j)) * a(i, j);
  return static_cast<double>(std::sqrt(s));
}

inline double frobenius(const rotseq::DenseMatrix& a) {
  long double s = 0;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) s += static_cast<long double>(a(i, j)) * a(i, j);
  return static_cast<double>(std::sqrt(s));
}

constexpr rotseq::TransformKind kKinds[] = {rotseq::TransformKind::Rotation,
                                            rotseq::TransformKind::Reflector};

}  // namespace testutil
