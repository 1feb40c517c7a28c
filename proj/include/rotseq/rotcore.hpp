#pragma once

// Reference algorithms for applying rotation sequences from the right.
//
// Every variant applies the same multiset of transforms and, for every matrix
// entry, the same ordered chain of 2x2 updates. In Arith::Strict they are
// therefore bit-identical to apply_naive.

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "rotseq/matrix.hpp"
#include "rotseq/sequence.hpp"
#include "rotseq/types.hpp"

namespace rotseq {

/// x' = c x + s y, y' = -s x + c y, elementwise. Throws UsageError on length
/// mismatch or overlapping views.
void rot(std::span<double> x, std::span<double> y, double c, double s,
         Arith arith = Arith::Strict);

/// x' = c x + s y, y' = s x - c y, evaluated as w = s (x + y),
/// x' = w + (c - s) x, y' = w - (c + s) y.
void apply_reflector_pair(std::span<double> x, std::span<double> y, double c, double s,
                          Arith arith = Arith::Strict);

/// Sequence-by-sequence order: p outer, j inner.
void apply_naive(MatrixView a, const RotationSequence& seq,
                 TransformKind kind = TransformKind::Rotation, Arith arith = Arith::Strict);

/// Diagonal waves j + p = const, ascending p inside a wave. Needs k <= n-1;
/// larger k belongs to the blocked driver, which chunks the sequences.
void apply_wavefront(MatrixView a, const RotationSequence& seq,
                     TransformKind kind = TransformKind::Rotation, Arith arith = Arith::Strict);

/// One parallelogram block. With n = a_block.cols - 1 and k = coeffs.cols,
/// applies (j, p) for p = 0..k-1, j = k-1-p .. n-p-1 (k (n-k+1) transforms).
/// Requires k <= n and coeffs.rows >= n.
void apply_block(MatrixView a_block, CoeffView coeffs,
                 TransformKind kind = TransformKind::Rotation, Arith arith = Arith::Strict);

/// n_r x k_r fused groups traversed in a wavefront over the group grid.
/// Groups cut by the matrix boundary are applied member by member.
void apply_fused(MatrixView a, const RotationSequence& seq, std::size_t n_r, std::size_t k_r,
                 TransformKind kind = TransformKind::Rotation, Arith arith = Arith::Strict);

// ---------------------------------------------------------------------------
// Traversal orders. The implementations above and the instrumented shadow
// runs in perfmodel share these, so a schedule bug shows up in both.

template <class F>
void for_each_naive(std::size_t n, std::size_t k, F&& f) {
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j + 1 < n; ++j) f(j, p);
  }
}

/// Waves w = 0 .. n+k-3; wave w holds (w - p, p) for ascending p.
template <class F>
void for_each_wavefront(std::size_t n, std::size_t k, F&& f) {
  if (n < 2 || k == 0) return;
  const std::size_t last_row = n - 2;
  for (std::size_t w = 0; w <= last_row + k - 1; ++w) {
    const std::size_t p_lo = w > last_row ? w - last_row : 0;
    const std::size_t p_hi = std::min(k - 1, w);
    for (std::size_t p = p_lo; p <= p_hi; ++p) f(w - p, p);
  }
}

/// Block-local indices for apply_block with n + 1 columns and k sequences.
template <class F>
void for_each_block(std::size_t n, std::size_t k, F&& f) {
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = k - 1 - p; j + p < n; ++j) f(j, p);
  }
}

/// One fused group: anchor row i and first lane p0; members are
/// (i + r - b, p0 + b) for b in [0, lanes), r in [0, n_r), b-major order.
struct FusedGroup {
  std::size_t anchor = 0;
  std::size_t p0 = 0;
  std::size_t lanes = 0;
};

/// Group grid (t, g) with anchor t * n_r and lanes starting at g * k_r, visited
/// in waves W = t + d g (d = floor((n_r - 1 + k_r) / n_r)), ascending g within a
/// wave. With n_r = k_r = 1 this is exactly for_each_wavefront.
template <class F>
void for_each_fused_group(std::size_t n, std::size_t k, std::size_t n_r, std::size_t k_r, F&& f) {
  if (n < 2 || k == 0) return;
  const std::size_t anchors = (n - 2 + k_r - 1) / n_r + 1;
  const std::size_t lane_groups = (k + k_r - 1) / k_r;
  const std::size_t d = (n_r - 1 + k_r) / n_r;
  const std::size_t waves = anchors + d * (lane_groups - 1);
  for (std::size_t w = 0; w < waves; ++w) {
    for (std::size_t g = 0; g < lane_groups && g * d <= w; ++g) {
      const std::size_t t = w - g * d;
      if (t >= anchors) continue;
      f(FusedGroup{t * n_r, g * k_r, std::min(k_r, k - g * k_r)});
    }
  }
}

/// Members of a group inside the valid index range, in application order.
std::vector<RotIndex> fused_group_members(const FusedGroup& group, std::size_t n, std::size_t n_r);

/// Wave decomposition of for_each_wavefront (for inspection and tests).
std::vector<std::vector<RotIndex>> wavefront_waves(std::size_t n, std::size_t k);

}  // namespace rotseq
