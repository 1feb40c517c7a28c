#pragma once

// Memory-operation and I/O models for each algorithm tier, plus an
// instrumented run that counts element traffic of the real loop nests.
//
// Model units: one matrix element (or one coefficient) moved between memory
// and registers is one operation. With W = n_b - k_b pipeline waves per block
// and R = m_b W k_b row-rotations:
//   basic   4 R + 2 W k_b
//   fused   (2/n_r + 2/k_r + 2/m_b) R
//   kernel  (2/k_r + 2/n_b + 2/m_r) R

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rotseq/blocksched.hpp"
#include "rotseq/matrix.hpp"
#include "rotseq/microkernel.hpp"
#include "rotseq/sequence.hpp"
#include "rotseq/types.hpp"

namespace rotseq {

enum class Formula { Basic, Fused, Kernel };
const char* to_string(Formula f);

struct MemOpReport {
  Formula formula = Formula::Basic;
  // Parameters the formula used; 0 where not applicable.
  std::size_t n_r = 0, k_r = 0, m_r = 0;
  std::size_t m_b = 0, n_b = 0, k_b = 0;
  // Fractional: the fused and kernel forms divide by register tile sizes.
  double loads = 0;
  double stores = 0;
  double total = 0;
  double factor = 0;  // total / (m_b (n_b - k_b) k_b)
};

/// Throws UsageError unless n_b > k_b >= 1 and m_b >= 1.
MemOpReport memops_basic(std::size_t m_b, std::size_t n_b, std::size_t k_b);
MemOpReport memops_fused(std::size_t n_r, std::size_t k_r, std::size_t m_b, std::size_t n_b,
                         std::size_t k_b);
MemOpReport memops_kernel(std::size_t k_r, std::size_t m_r, std::size_t m_b, std::size_t n_b,
                          std::size_t k_b);

/// Registers a fused n_r x k_r group needs: 2 n_r k_r coefficients plus n_r + k_r values.
std::size_t fused_register_count(std::size_t n_r, std::size_t k_r);

struct IoReport {
  double lower_bound = 0;             // m n k / sqrt(S)
  double wavefront_io = 0;            // m n k / (m_b k_b) (2 m_b + 2 k_b)
  double op_intensity_bound = 0;      // 6 sqrt(S)
  double op_intensity_wavefront = 0;  // flops / wavefront_io
  double flops = 0;                   // 6 m n k
};

/// Throws UsageError on non-positive input and ModelError when m_b k_b > S.
IoReport io_models(double m, double n, double k, double S, double m_b, double k_b);

/// Flops actually performed: 6 m (n-1) k.
double exact_flops(std::size_t m, std::size_t n, std::size_t k);

// ---------------------------------------------------------------------------
// Instrumented runs

enum class Variant { Naive, Wavefront, Blocked, Fused, Kernel, KernelPrepacked };
const char* to_string(Variant v);
/// Accepts the CLI names: naive, wavefront, blocked, fused, kernel, kernel-prepacked.
Variant parse_variant(const std::string& name);

struct InstrumentOptions {
  BlockPlan plan = [] {
    BlockPlan p;
    p.n_b = 16, p.k_b = 4, p.m_b = 32;
    return p;
  }();
  KernelShape shape{};  // mode is ignored: counted runs are strict
  std::size_t fused_n_r = 2;
  std::size_t fused_k_r = 2;
  TransformKind kind = TransformKind::Rotation;
};

struct Counters {
  std::uint64_t a_loads = 0;
  std::uint64_t a_stores = 0;
  std::uint64_t coef_loads = 0;
  std::uint64_t row_rotations = 0;  // live rows summed over every transform
  std::uint64_t kernel_calls = 0;   // wave-kernel / fused-group / pair calls
  /// Application order of the transforms seen by the first row tile
  /// (first panel for the kernel paths).
  std::vector<RotIndex> order;
  std::vector<BlockEvent> blocks;  // kernel paths only

  std::uint64_t transforms() const { return order.size(); }
};

inline constexpr std::size_t kInstrumentLimit = std::size_t{1} << 20;

/// Runs `variant` on A through counting kernels (strict arithmetic). The
/// output is bit-identical to the uncounted variant. Throws UsageError when
/// m n exceeds kInstrumentLimit.
Counters instrumented_apply(Variant variant, MatrixView a, const RotationSequence& seq,
                            const InstrumentOptions& opt = {});

/// True when `order` applies every (j, p) of an n x k sequence exactly once
/// and each (j, p) follows (j-1, p) and (j+1, p-1).
bool order_respects_dependencies(const std::vector<RotIndex>& order, std::size_t n,
                                 std::size_t k);

struct BlockMeasurement {
  MemOpReport measured;  // counter totals in MemOpReport form
  MemOpReport model;
  double relative_gap = 0;  // |measured - model| / model
};

/// One pipeline block: n_b - k_b waves of k_b lanes on m_b rows (random data).
/// Basic runs transform by transform; Kernel runs the packed register kernel
/// with shape (m_r must divide m_b).
BlockMeasurement instrumented_block(Formula formula, std::size_t m_b, std::size_t n_b,
                                    std::size_t k_b, const KernelShape& shape = {});

// ---------------------------------------------------------------------------
// Output

/// Header: formula_id,n_r,k_r,m_r,m_b,n_b,k_b,loads,stores,total,factor
std::string memops_csv_header();
std::string memops_csv_row(const MemOpReport& r);
void print_memops(std::ostream& os, const MemOpReport& r);
void print_io(std::ostream& os, const IoReport& r);

}  // namespace rotseq
