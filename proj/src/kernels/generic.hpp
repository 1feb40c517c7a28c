#pragma once

// Scalar transform formulas and the generic (runtime-shape) kernels.
//
// Everything here has internal linkage: the header is compiled into
// translation units with different floating-point contraction settings, and
// each must keep its own copy.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rotseq/types.hpp"

namespace rotseq::kernels {
namespace {

struct NoCount {
  void a_load(std::size_t) {}
  void a_store(std::size_t) {}
  void coef_load(std::size_t) {}
};

/// Per-transform constants. For reflectors (c - s) and (c + s) are formed once.
template <TransformKind K>
struct Coeffs {
  double c, s, cms, cps;
  Coeffs(double c_, double s_) : c(c_), s(s_), cms(c_ - s_), cps(c_ + s_) {}
};

/// Rotation:  x' = c x + s y,  y' = c y - s x       (4 mul, 2 add)
/// Reflector: w = s (x + y), x' = w + (c - s) x, y' = w - (c + s) y   (3 mul, 3 add)
template <TransformKind K>
inline void apply2(double& x, double& y, const Coeffs<K>& q) {
  const double xv = x;
  const double yv = y;
  if constexpr (K == TransformKind::Rotation) {
    x = q.c * xv + q.s * yv;
    y = q.c * yv - q.s * xv;
  } else {
    const double w = q.s * (xv + yv);
    x = w + q.cms * xv;
    y = w - q.cps * yv;
  }
}

template <TransformKind K>
inline void pair_apply(double* __restrict x, double* __restrict y, std::size_t m, double c,
                       double s) {
  const Coeffs<K> q(c, s);
  if constexpr (K == TransformKind::Rotation) {
    for (std::size_t i = 0; i < m; ++i) {
      const double xv = x[i];
      const double yv = y[i];
      x[i] = q.c * xv + q.s * yv;
      y[i] = q.c * yv - q.s * xv;
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      const double xv = x[i];
      const double yv = y[i];
      const double w = q.s * (xv + yv);
      x[i] = w + q.cms * xv;
      y[i] = w - q.cps * yv;
    }
  }
}

/// Fused group over `ncols` adjacent columns. Member t acts on local columns
/// (first[t], first[t] + 1) with coefficients (c[t], s[t]), in order.
template <TransformKind K, class Counter = NoCount>
void fused_generic(double* const* cols, std::size_t ncols, std::size_t m,
                   const std::uint8_t* first, const double* c, const double* s,
                   std::size_t members, Counter& counter) {
  constexpr std::size_t kMaxCols = 64;
  double v[kMaxCols];
  std::vector<Coeffs<K>> q;
  q.reserve(members);
  for (std::size_t t = 0; t < members; ++t) q.emplace_back(c[t], s[t]);
  counter.coef_load(2 * members);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t u = 0; u < ncols; ++u) v[u] = cols[u][i];
    counter.a_load(ncols);
    for (std::size_t t = 0; t < members; ++t) apply2<K>(v[first[t]], v[first[t] + 1], q[t]);
    for (std::size_t u = 0; u < ncols; ++u) cols[u][i] = v[u];
    counter.a_store(ncols);
  }
}

/// Generic wave kernel for any (m_r, k_r). Keeps a window of k_r + 1 columns
/// resident; each panel column is loaded once and stored once per call.
///
/// Wave w, lane l rotates panel columns (w + k_r - 1 - l, w + k_r - l) with
/// tile entry w * k_r + l.
template <TransformKind K, class Counter = NoCount>
void wave_generic(double* panel, std::size_t m_r, const double* c, const double* s,
                  std::size_t n_waves, std::size_t k_r, Counter& counter) {
  const std::size_t slots = k_r + 1;
  thread_local std::vector<double> window;
  window.resize(m_r * slots);
  auto slot = [&](std::size_t col) { return window.data() + (col % slots) * m_r; };
  auto column = [&](std::size_t col) { return panel + col * m_r; };

  for (std::size_t q = 0; q < k_r; ++q) {
    std::copy_n(column(q), m_r, slot(q));
    counter.a_load(m_r);
  }
  for (std::size_t w = 0; w < n_waves; ++w) {
    std::copy_n(column(w + k_r), m_r, slot(w + k_r));
    counter.a_load(m_r);
    for (std::size_t l = 0; l < k_r; ++l) {
      const std::size_t t = w * k_r + l;
      counter.coef_load(2);
      pair_apply<K>(slot(w + k_r - 1 - l), slot(w + k_r - l), m_r, c[t], s[t]);
    }
    std::copy_n(slot(w), m_r, column(w));
    counter.a_store(m_r);
  }
  for (std::size_t q = 0; q < k_r; ++q) {
    std::copy_n(slot(n_waves + q), m_r, column(n_waves + q));
    counter.a_store(m_r);
  }
}

}  // namespace
}  // namespace rotseq::kernels
