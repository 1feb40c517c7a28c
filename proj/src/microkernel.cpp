#include "rotseq/microkernel.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "kernels/kernel_set.hpp"
#include "rotseq/error.hpp"

namespace rotseq {

namespace {

std::atomic<bool> g_fault{false};

void nudge(PanelView panel) {
  if (g_fault.load(std::memory_order_relaxed) && panel.m_r > 0 && panel.n_cols > 0) {
    panel.base[0] = std::nextafter(panel.base[0], std::numeric_limits<double>::infinity());
  }
}

void check_call(const PanelView& panel, std::span<const double> c_tile,
                std::span<const double> s_tile, std::size_t n_waves, const KernelShape& shape) {
  shape.validate();
  if (panel.m_r != shape.m_r) {
    throw UsageError("panel row tile " + std::to_string(panel.m_r) + " != shape m_r " +
                     std::to_string(shape.m_r));
  }
  if (n_waves == 0) return;
  if (panel.n_cols < n_waves + shape.k_r) {
    throw UsageError("panel has " + std::to_string(panel.n_cols) + " columns; " +
                     std::to_string(n_waves) + " waves of " + std::to_string(shape.k_r) +
                     " need " + std::to_string(n_waves + shape.k_r));
  }
  const std::size_t need = n_waves * shape.k_r;
  if (c_tile.size() < need || s_tile.size() < need) {
    throw UsageError("coefficient tiles need " + std::to_string(need) + " entries");
  }
}

}  // namespace

void KernelShape::validate() const {
  if (m_r < 1 || k_r < 1) {
    throw UsageError("kernel shape needs m_r >= 1 and k_r >= 1 (got " + std::to_string(m_r) +
                     ", " + std::to_string(k_r) + ")");
  }
}

std::size_t KernelShape::registers_needed() const {
  const std::size_t w = vector_width == 0 ? 1 : vector_width;
  return (m_r + w - 1) / w * (k_r + 1) + 2;
}

void kernel_wave_apply(PanelView panel, std::span<const double> c_tile,
                       std::span<const double> s_tile, std::size_t n_waves,
                       const KernelShape& shape, TransformKind kind) {
  check_call(panel, c_tile, s_tile, n_waves, shape);
  if (n_waves == 0) return;
  const auto& ks = kernels::kernel_set(shape.mode, kind);
  const auto fn = ks.find(shape.m_r, shape.k_r);
  (fn ? fn : ks.wave_generic)(panel.base, shape.m_r, c_tile.data(), s_tile.data(), n_waves,
                              shape.k_r);
  nudge(panel);
}

void kernel_generic_apply(PanelView panel, std::span<const double> c_tile,
                          std::span<const double> s_tile, std::size_t n_waves,
                          const KernelShape& shape, TransformKind kind) {
  check_call(panel, c_tile, s_tile, n_waves, shape);
  if (n_waves == 0) return;
  kernels::kernel_set(shape.mode, kind)
      .wave_generic(panel.base, shape.m_r, c_tile.data(), s_tile.data(), n_waves, shape.k_r);
  nudge(panel);
}

void kernel_specialized_apply(PanelView panel, std::span<const double> c_tile,
                              std::span<const double> s_tile, std::size_t n_waves,
                              const KernelShape& shape, TransformKind kind) {
  check_call(panel, c_tile, s_tile, n_waves, shape);
  const auto fn = kernels::kernel_set(shape.mode, kind).find(shape.m_r, shape.k_r);
  if (!fn) {
    throw UsageError("no fixed-shape kernel for (" + std::to_string(shape.m_r) + ", " +
                     std::to_string(shape.k_r) + ")");
  }
  if (n_waves == 0) return;
  fn(panel.base, shape.m_r, c_tile.data(), s_tile.data(), n_waves, shape.k_r);
  nudge(panel);
}

bool has_specialized_kernel(std::size_t m_r, std::size_t k_r) {
  return kernels::strict_kernel_set(TransformKind::Rotation).find(m_r, k_r) != nullptr;
}

std::vector<std::pair<std::size_t, std::size_t>> specialized_shapes() {
  const auto& ks = kernels::strict_kernel_set(TransformKind::Rotation);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < ks.n_specialized; ++i) {
    out.emplace_back(ks.specialized[i].m_r, ks.specialized[i].k_r);
  }
  return out;
}

std::size_t kernel_edge_apply(PanelView panel, CoeffView chunk, EdgeTriangle triangle,
                              const KernelShape& shape, TransformKind kind) {
  const std::size_t kb = chunk.cols;
  if (kb <= 1) return 0;
  const std::size_t n = chunk.rows + 1;
  if (kb > n - 1) {
    throw UsageError("edge triangle of width " + std::to_string(kb) + " needs at least " +
                     std::to_string(kb + 1) + " columns");
  }
  if (panel.n_cols < n) {
    throw UsageError("panel has " + std::to_string(panel.n_cols) + " columns, chunk needs " +
                     std::to_string(n));
  }
  KernelShape lane = shape;
  lane.k_r = 1;
  std::size_t applied = 0;
  // One k_r = 1 call per lane: coefficients of a lane are contiguous in j.
  if (triangle == EdgeTriangle::Startup) {
    for (std::size_t l = 0; l + 1 < kb; ++l) {
      const std::size_t waves = kb - 1 - l;
      kernel_wave_apply(panel, {chunk.cos_col(l), waves}, {chunk.sin_col(l), waves}, waves,
                        lane, kind);
      applied += waves;
    }
  } else {
    for (std::size_t l = 1; l < kb; ++l) {
      const std::size_t j0 = n - 1 - l;
      kernel_wave_apply(panel.shifted(j0), {chunk.cos_col(l) + j0, l},
                        {chunk.sin_col(l) + j0, l}, l, lane, kind);
      applied += l;
    }
  }
  return applied;
}

namespace testing {

void inject_kernel_fault(bool on) { g_fault.store(on); }
bool kernel_fault_injected() { return g_fault.load(); }

}  // namespace testing

}  // namespace rotseq
