#pragma once

#include <cstddef>
#include <cstdint>

#include "rotseq/types.hpp"

namespace rotseq::kernels {

/// Transform applied to two columns of length m.
using PairFn = void (*)(double* x, double* y, std::size_t m, double c, double s);

/// 2x2 fused group on four adjacent columns a0..a3. cs holds the four
/// (c, s) pairs in application order for column pairs (1,2), (2,3), (0,1), (1,2).
using Fused2x2Fn = void (*)(double* a0, double* a1, double* a2, double* a3, std::size_t m,
                            const double* cs);

/// Arbitrary fused group; see fused_generic in generic.hpp.
using FusedFn = void (*)(double* const* cols, std::size_t ncols, std::size_t m,
                         const std::uint8_t* first, const double* c, const double* s,
                         std::size_t members);

/// Wave kernel on a packed panel (columns m_r apart). Fixed-shape kernels
/// ignore the m_r / k_r arguments.
using WaveFn = void (*)(double* panel, std::size_t m_r, const double* c, const double* s,
                        std::size_t n_waves, std::size_t k_r);

struct SpecializedWave {
  std::size_t m_r;
  std::size_t k_r;
  WaveFn fn;
};

struct KernelSet {
  PairFn pair = nullptr;
  Fused2x2Fn fused2x2 = nullptr;
  FusedFn fused = nullptr;
  WaveFn wave_generic = nullptr;
  const SpecializedWave* specialized = nullptr;
  std::size_t n_specialized = 0;

  /// Fixed-shape kernel for (m_r, k_r), or nullptr.
  WaveFn find(std::size_t m_r, std::size_t k_r) const {
    for (std::size_t i = 0; i < n_specialized; ++i) {
      if (specialized[i].m_r == m_r && specialized[i].k_r == k_r) return specialized[i].fn;
    }
    return nullptr;
  }
};

const KernelSet& strict_kernel_set(TransformKind kind);
const KernelSet& fast_kernel_set(TransformKind kind);

inline const KernelSet& kernel_set(Arith arith, TransformKind kind) {
  return arith == Arith::Strict ? strict_kernel_set(kind) : fast_kernel_set(kind);
}

/// Element traffic seen by the counted kernels below.
struct MemCounts {
  std::uint64_t a_loads = 0;
  std::uint64_t a_stores = 0;
  std::uint64_t coef_loads = 0;
};

/// Strict-arithmetic generic kernels with element counters.
void counted_wave(TransformKind kind, double* panel, std::size_t m_r, const double* c,
                  const double* s, std::size_t n_waves, std::size_t k_r, MemCounts& counts);
void counted_fused(TransformKind kind, double* const* cols, std::size_t ncols, std::size_t m,
                   const std::uint8_t* first, const double* c, const double* s,
                   std::size_t members, MemCounts& counts);

}  // namespace rotseq::kernels
