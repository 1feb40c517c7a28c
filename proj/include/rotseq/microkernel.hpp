#pragma once

// Register-reuse kernel: n_waves waves of k_r transforms on an m_r-row packed
// panel. The k_r + 1 columns of the current wave stay resident; coefficients
// stream in, one broadcast (c, s) per lane per wave.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rotseq/sequence.hpp"
#include "rotseq/types.hpp"

namespace rotseq {

struct KernelShape {
  std::size_t m_r = 16;
  std::size_t k_r = 2;
  std::size_t vector_width = 4;  // informational
  Arith mode = Arith::Strict;

  /// Throws UsageError unless m_r >= 1 and k_r >= 1.
  void validate() const;
  /// Vector registers the kernel keeps live: ceil(m_r / w) (k_r + 1) + 2.
  std::size_t registers_needed() const;
  /// Advisory only; shapes over budget are still accepted.
  bool within_register_budget(std::size_t available = 16) const {
    return registers_needed() <= available;
  }
};

/// Columns of a packed panel are m_r apart: column j starts at base + j m_r.
struct PanelView {
  double* base = nullptr;
  std::size_t n_cols = 0;
  std::size_t m_r = 0;

  double* col(std::size_t j) const { return base + j * m_r; }
  PanelView shifted(std::size_t first_col) const {
    return {base + first_col * m_r, n_cols - first_col, m_r};
  }
};

/// Applies waves w = 0..n_waves-1; lane l of wave w rotates columns
/// (w + k_r - 1 - l, w + k_r - l) with tile entry w * k_r + l. Uses a
/// fixed-shape kernel when one exists for (m_r, k_r), else the generic one.
void kernel_wave_apply(PanelView panel, std::span<const double> c_tile,
                       std::span<const double> s_tile, std::size_t n_waves,
                       const KernelShape& shape, TransformKind kind = TransformKind::Rotation);

/// Same contract, always the runtime-shape kernel.
void kernel_generic_apply(PanelView panel, std::span<const double> c_tile,
                          std::span<const double> s_tile, std::size_t n_waves,
                          const KernelShape& shape,
                          TransformKind kind = TransformKind::Rotation);

/// Same contract, fixed-shape kernel only; UsageError if none exists.
void kernel_specialized_apply(PanelView panel, std::span<const double> c_tile,
                              std::span<const double> s_tile, std::size_t n_waves,
                              const KernelShape& shape,
                              TransformKind kind = TransformKind::Rotation);

bool has_specialized_kernel(std::size_t m_r, std::size_t k_r);
std::vector<std::pair<std::size_t, std::size_t>> specialized_shapes();

enum class EdgeTriangle { Startup, Shutdown };

/// Startup or shutdown triangle of one sequence chunk, applied with k_r = 1
/// waves, one lane at a time. `chunk` holds the chunk's coefficients
/// (n-1 rows, k_b columns) and the panel spans all n columns.
///   Startup:  lane l = 0..k_b-2 applies j = 0 .. k_b-2-l.
///   Shutdown: lane l = 1..k_b-1 applies j = n-1-l .. n-2.
/// Returns the number of transforms applied ((k_b - 1) k_b / 2).
std::size_t kernel_edge_apply(PanelView panel, CoeffView chunk, EdgeTriangle triangle,
                              const KernelShape& shape,
                              TransformKind kind = TransformKind::Rotation);

namespace testing {
/// Fault injection for harness self-tests: when on, every kernel call nudges
/// the first panel value by one ulp after computing.
void inject_kernel_fault(bool on);
bool kernel_fault_injected();
}  // namespace testing

}  // namespace rotseq
