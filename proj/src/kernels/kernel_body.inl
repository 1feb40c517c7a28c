// Kernel bodies shared by kernels_strict.cpp and kernels_fast.cpp.
//
// Included exactly once per arithmetic mode; the contraction flag of the
// including translation unit decides whether multiply-adds get fused.
// All definitions have internal linkage.

#include <cstring>
#include <type_traits>
#include <utility>

#include "kernels/generic.hpp"
#include "kernels/kernel_set.hpp"

namespace rotseq::kernels {
namespace {

#define ROTSEQ_INLINE __attribute__((always_inline))

typedef double v4d __attribute__((vector_size(32)));
typedef double v8d __attribute__((vector_size(64)));

template <int VW>
using vec_t = std::conditional_t<VW == 8, v8d, v4d>;

template <class V>
inline V load(const double* p) {
  V r;
  std::memcpy(&r, p, sizeof(r));
  return r;
}

template <class V>
inline void store(double* p, V v) {
  std::memcpy(p, &v, sizeof(v));
}

template <class V>
inline V splat(double x) {
  if constexpr (sizeof(V) == 64) {
    return V{x, x, x, x, x, x, x, x};
  } else {
    return V{x, x, x, x};
  }
}

template <TransformKind K, class V>
inline void apply_vec(V& x, V& y, V c, V s, V cms, V cps) {
  const V xv = x;
  const V yv = y;
  if constexpr (K == TransformKind::Rotation) {
    (void)cms;
    (void)cps;
    x = c * xv + s * yv;
    y = c * yv - s * xv;
  } else {
    (void)c;
    const V w = s * (xv + yv);
    x = w + cms * xv;
    y = w - cps * yv;
  }
}

// 512-bit tiles where the row tile allows it and the target has them.
#if defined(__AVX512F__)
constexpr int wide_width(int mr) { return mr % 8 == 0 ? 8 : 4; }
#else
constexpr int wide_width(int) { return 4; }
#endif

/// Fixed-shape register kernel: the k_r + 1 live columns of the current wave
/// are held in MR/VW vector registers each; coefficients are broadcast per lane.
///
/// Panel column j lives in window slot j % (KR + 1). The wave loop is unrolled
/// by KR + 1 so every slot index is a compile-time constant and the window
/// never moves between registers.
template <TransformKind K, int MR, int KR>
void wave_fixed(double* panel, std::size_t, const double* c, const double* s,
                std::size_t n_waves, std::size_t) {
  constexpr int VW = wide_width(MR);
  static_assert(MR % VW == 0, "row tile must be a whole number of vectors");
  using V = vec_t<VW>;
  constexpr int NV = MR / VW;
  constexpr int S = KR + 1;
  V win[S][NV];

#pragma GCC unroll 16
  for (int q = 0; q < KR; ++q) {
#pragma GCC unroll 16
    for (int v = 0; v < NV; ++v) win[q][v] = load<V>(panel + q * MR + VW * v);
  }

  // Wave w = base + P with base a multiple of S.
  auto wave = [&]<int P>(std::size_t w) ROTSEQ_INLINE {
    const double* incoming = panel + (w + KR) * MR;
#pragma GCC unroll 16
    for (int v = 0; v < NV; ++v) win[(P + KR) % S][v] = load<V>(incoming + VW * v);
    const double* cw = c + w * KR;
    const double* sw = s + w * KR;
    [&]<int... L>(std::integer_sequence<int, L...>) ROTSEQ_INLINE {
      ([&]() ROTSEQ_INLINE {
        const V cc = splat<V>(cw[L]);
        const V ss = splat<V>(sw[L]);
        V cms{}, cps{};
        if constexpr (K == TransformKind::Reflector) {
          cms = splat<V>(cw[L] - sw[L]);
          cps = splat<V>(cw[L] + sw[L]);
        }
        constexpr int lo = (P + KR - 1 - L) % S;
        constexpr int hi = (P + KR - L) % S;
#pragma GCC unroll 16
        for (int v = 0; v < NV; ++v) apply_vec<K>(win[lo][v], win[hi][v], cc, ss, cms, cps);
      }(), ...);
    }(std::make_integer_sequence<int, KR>{});
    double* outgoing = panel + w * MR;
#pragma GCC unroll 16
    for (int v = 0; v < NV; ++v) store<V>(outgoing + VW * v, win[P % S][v]);
  };

  std::size_t base = 0;
  for (; base + S <= n_waves; base += S) {
    [&]<int... P>(std::integer_sequence<int, P...>) ROTSEQ_INLINE {
      (wave.template operator()<P>(base + P), ...);
    }(std::make_integer_sequence<int, S>{});
  }
  const std::size_t rem = n_waves - base;
  [&]<int... P>(std::integer_sequence<int, P...>) ROTSEQ_INLINE {
    ((static_cast<std::size_t>(P) < rem ? wave.template operator()<P>(base + P) : void()), ...);
  }(std::make_integer_sequence<int, S>{});

  // Columns n_waves .. n_waves + KR - 1 sit in slots (rem + q) % S.
  [&]<int... R>(std::integer_sequence<int, R...>) ROTSEQ_INLINE {
    ([&]() ROTSEQ_INLINE {
      if (static_cast<std::size_t>(R) != rem) return;
#pragma GCC unroll 16
      for (int q = 0; q < KR; ++q) {
#pragma GCC unroll 16
        for (int v = 0; v < NV; ++v) {
          store<V>(panel + (n_waves + q) * MR + VW * v, win[(R + q) % S][v]);
        }
      }
    }(), ...);
  }(std::make_integer_sequence<int, S>{});
}

template <TransformKind K>
void pair_fn(double* x, double* y, std::size_t m, double c, double s) {
  pair_apply<K>(x, y, m, c, s);
}

template <TransformKind K>
void fused2x2_fn(double* __restrict a0, double* __restrict a1, double* __restrict a2,
                 double* __restrict a3, std::size_t m, const double* cs) {
  const Coeffs<K> q0(cs[0], cs[1]);
  const Coeffs<K> q1(cs[2], cs[3]);
  const Coeffs<K> q2(cs[4], cs[5]);
  const Coeffs<K> q3(cs[6], cs[7]);
  for (std::size_t i = 0; i < m; ++i) {
    double x0 = a0[i], x1 = a1[i], x2 = a2[i], x3 = a3[i];
    apply2<K>(x1, x2, q0);
    apply2<K>(x2, x3, q1);
    apply2<K>(x0, x1, q2);
    apply2<K>(x1, x2, q3);
    a0[i] = x0;
    a1[i] = x1;
    a2[i] = x2;
    a3[i] = x3;
  }
}

template <TransformKind K>
void fused_fn(double* const* cols, std::size_t ncols, std::size_t m, const std::uint8_t* first,
              const double* c, const double* s, std::size_t members) {
  NoCount none;
  fused_generic<K>(cols, ncols, m, first, c, s, members, none);
}

template <TransformKind K>
void wave_generic_fn(double* panel, std::size_t m_r, const double* c, const double* s,
                     std::size_t n_waves, std::size_t k_r) {
  NoCount none;
  wave_generic<K>(panel, m_r, c, s, n_waves, k_r, none);
}

template <TransformKind K>
const SpecializedWave kSpecialized[] = {
    {16, 2, &wave_fixed<K, 16, 2>}, {8, 5, &wave_fixed<K, 8, 5>},
    {12, 3, &wave_fixed<K, 12, 3>}, {48, 1, &wave_fixed<K, 48, 1>},
    {16, 1, &wave_fixed<K, 16, 1>}, {8, 1, &wave_fixed<K, 8, 1>},
    {12, 1, &wave_fixed<K, 12, 1>},
};

template <TransformKind K>
const KernelSet kSet{
    &pair_fn<K>,
    &fused2x2_fn<K>,
    &fused_fn<K>,
    &wave_generic_fn<K>,
    kSpecialized<K>,
    sizeof(kSpecialized<K>) / sizeof(SpecializedWave),
};

const KernelSet& select_set(TransformKind kind) {
  return kind == TransformKind::Rotation ? kSet<TransformKind::Rotation>
                                         : kSet<TransformKind::Reflector>;
}

}  // namespace
}  // namespace rotseq::kernels
