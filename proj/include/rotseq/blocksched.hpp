#pragma once

// Cache-level orchestration: block-size planning, row-block packing, and the
// blocked loop nest that drives the register kernel.
//
// Loop order, outermost first:
//   row blocks of m_b rows (split across threads)
//     sequence chunks of k_b sequences
//       startup triangle | pipeline blocks of n_b waves | shutdown triangle
//         m_r-row panels of the row block
//           lane groups of k_r lanes -> one kernel call

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "rotseq/matrix.hpp"
#include "rotseq/microkernel.hpp"
#include "rotseq/sequence.hpp"
#include "rotseq/types.hpp"

namespace rotseq {

/// Capacities in double-precision elements; S is the fast-memory size used
/// by the I/O models.
struct CacheSpec {
  std::size_t T1 = 4000;
  std::size_t T2 = 32000;
  std::size_t T3 = 4480000;
  std::size_t S = 32000;
  std::size_t line_bytes = 64;
  std::size_t page_bytes = 4096;

  /// Throws UsageError unless 0 < T1 <= T2 <= T3 and the rest are positive.
  void validate() const;
};

inline constexpr std::size_t kDefaultRowBlockCap = 4800;

/// floor((T1 - m_r k_r) / (m_r + 2 k_r)); 0 when the kernel footprint alone exceeds T1.
std::size_t l1_wave_bound(std::size_t T1, std::size_t m_r, std::size_t k_r);
/// floor((T2 - m_r n_b) / (m_r + 2 n_b)).
std::size_t l2_chunk_bound(std::size_t T2, std::size_t m_r, std::size_t n_b);
/// floor(T3 / (n_b + k_b)).
std::size_t l3_row_bound(std::size_t T3, std::size_t n_b, std::size_t k_b);

struct PlanBounds {
  std::size_t n_b = 0;  // L1 bound for the shape
  std::size_t k_b = 0;  // L2 bound at the chosen n_b
  std::size_t m_b = 0;  // L3 bound at the chosen n_b, k_b
};

struct BlockPlan {
  std::size_t n_b = 0;  // waves per kernel call
  std::size_t k_b = 0;  // sequences per chunk
  std::size_t m_b = 0;  // rows per row block
  std::size_t m_b_cap = kDefaultRowBlockCap;
  PlanBounds raw;  // filled by choose_block_sizes

  /// Throws UsageError unless the plan can drive `shape`: n_b >= 1,
  /// k_b >= k_r, m_b a positive multiple of m_r.
  void validate_for(const KernelShape& shape) const;
};

/// Picks (n_b, k_b, m_b):
///   n_b: L1 bound with 1% of T1 held back, rounded down to a multiple of 8
///        (kept as-is when below 8);
///   k_b: L2 bound at that n_b, rounded down to a multiple of k_r;
///   m_b: min(L3 bound, m_b_cap) rounded down to a multiple of m_r.
/// Throws PlanningError when a level cannot hold even one kernel footprint.
BlockPlan choose_block_sizes(const CacheSpec& cache, const KernelShape& shape,
                             std::size_t m_b_cap = kDefaultRowBlockCap);

/// The three cache inequalities, checked directly.
bool plan_fits(const BlockPlan& plan, const CacheSpec& cache, const KernelShape& shape);

/// Row block in panel-major order: ceil(rows / m_r) panels, each storing its
/// columns as consecutive m_r-value segments. Zero-padded, base aligned.
class PackedPanels {
 public:
  PackedPanels() = default;
  PackedPanels(std::size_t rows, std::size_t cols, std::size_t m_r, std::size_t alignment = 64);

  /// New shape; keeps the allocation when it is large enough. Contents are
  /// unspecified afterwards.
  void reshape(std::size_t rows, std::size_t cols, std::size_t m_r);
  std::size_t capacity() const { return capacity_; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t m_r() const { return m_r_; }
  std::size_t panels() const { return m_r_ == 0 ? 0 : (rows_ + m_r_ - 1) / m_r_; }
  std::size_t size() const { return panels() * m_r_ * cols_; }
  std::size_t alignment() const { return alignment_; }

  double* data() { return data_.get(); }
  const double* data() const { return data_.get(); }
  PanelView panel(std::size_t p) {
    return {data_.get() + p * m_r_ * cols_, cols_, m_r_};
  }
  /// Element (i, j) of the live region.
  double at(std::size_t i, std::size_t j) const {
    return data_[(i / m_r_) * m_r_ * cols_ + j * m_r_ + i % m_r_];
  }

 private:
  struct Free {
    void operator()(double* p) const;
  };
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t m_r_ = 0;
  std::size_t alignment_ = 64;
  std::size_t capacity_ = 0;  // doubles
  std::unique_ptr<double[], Free> data_;
};

/// Packs rows [row_start, row_start + row_count) of A. Padding rows are zero.
PackedPanels pack_row_block(const MatrixView& a, std::size_t row_start, std::size_t row_count,
                            std::size_t m_r, std::size_t alignment = 64);
/// Refills an existing buffer (same shape) without reallocating.
void pack_into(PackedPanels& dst, const MatrixView& a, std::size_t row_start);
/// Copies the live region back to rows [row_start, row_start + rows) of A.
void unpack_row_block(const PackedPanels& panels, MatrixView a, std::size_t row_start);

struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const RowRange&, const RowRange&) = default;
};

/// Splits [0, m) into `threads` ranges of whole m_r-row panels; panel counts
/// differ by at most one and the larger shares come first. The range holding
/// row m-1 may end in a partial panel; ranges past the end are empty.
std::vector<RowRange> partition_rows(std::size_t m, std::size_t threads, std::size_t m_r);

/// Kernel path: per row block pack, run the blocked loop nest, unpack.
/// Output equals apply_naive (bitwise when shape.mode is Strict).
void apply_blocked(MatrixView a, const RotationSequence& seq, const BlockPlan& plan,
                   const KernelShape& shape, TransformKind kind = TransformKind::Rotation,
                   std::size_t threads = 1);

/// Kernel path on a matrix that already lives in packed form (all m rows,
/// panel height shape.m_r). No packing or unpacking happens here.
void apply_blocked_packed(PackedPanels& a, const RotationSequence& seq, const BlockPlan& plan,
                          const KernelShape& shape, TransformKind kind = TransformKind::Rotation,
                          std::size_t threads = 1);

/// Same prepacked switch as a flag: with prepacked the caller's matrix is
/// `packed` and `a` is ignored.
void apply_blocked(MatrixView a, PackedPanels* packed, bool prepacked,
                   const RotationSequence& seq, const BlockPlan& plan, const KernelShape& shape,
                   TransformKind kind, std::size_t threads);

/// Blocked traversal without packing or the register kernel: parallelogram
/// blocks via apply_block, triangles in wavefront order, directly on A.
void apply_block_sweep(MatrixView a, const RotationSequence& seq, const BlockPlan& plan,
                       TransformKind kind = TransformKind::Rotation,
                       Arith arith = Arith::Strict);

/// One apply_block call of the sweep: columns [j0, j0 + n_cols) and
/// sequences [p0, p0 + k) on a row range. Triangle transforms are steps with
/// n_cols = 2, k = 1.
struct SweepStep {
  RowRange rows;
  std::size_t j0 = 0;
  std::size_t p0 = 0;
  std::size_t n_cols = 0;
  std::size_t k = 0;
};

/// The schedule behind apply_block_sweep, in execution order.
void for_each_sweep_step(std::size_t m, std::size_t n, std::size_t k, const BlockPlan& plan,
                         const std::function<void(const SweepStep&)>& f);

// ---------------------------------------------------------------------------
// Loop-nest skeleton shared with the instrumented shadow run in perfmodel.

enum class Phase { Startup, Pipeline, Shutdown };

/// One kernel invocation in panel-local coordinates.
struct KernelCall {
  Phase phase;
  std::size_t first_col;  // panel column where the call's window starts
  std::size_t n_waves;
  std::size_t k_r;        // lanes per wave (1 in triangles)
  const double* c;        // wave-major tiles
  const double* s;
  std::size_t p0;         // first global sequence index of the call's lanes
};

/// Block-level event, emitted once per block (before its panels run).
struct BlockEvent {
  std::size_t row_block;
  std::size_t p_b;   // chunk start
  Phase phase;
  std::size_t w0;    // first chunk-local wave of the block
  std::size_t n_waves;
};

/// Gathers wave-major coefficient tiles for one pipeline block.
class TileBuffer {
 public:
  /// Tiles for lanes [q, q + k_r) of chunk p0, waves w0 .. w0 + n_waves - 1
  /// (chunk-local wave index j + lane).
  void gather(const CoeffView& coeffs, std::size_t p0, std::size_t q, std::size_t k_r,
              std::size_t w0, std::size_t n_waves);
  const double* c() const { return c_.data(); }
  const double* s() const { return s_.data(); }

 private:
  std::vector<double> c_, s_;
};

/// Runs the chunk/phase/block loops for one row block of `panels` panels.
/// `call(panel_index, KernelCall)` executes one kernel; `event` observes blocks.
void for_each_kernel_call(std::size_t n, const CoeffView& coeffs, const BlockPlan& plan,
                          std::size_t k_r, std::size_t panels, std::size_t row_block,
                          const std::function<void(std::size_t, const KernelCall&)>& call,
                          const std::function<void(const BlockEvent&)>& event = {});

/// Key=value cache configuration file. Keys: T1, T2, T3, S, line_bytes,
/// page_bytes, m_b_cap, threads. '#' starts a comment.
struct BenchConfig {
  CacheSpec cache;
  std::size_t m_b_cap = kDefaultRowBlockCap;
  std::size_t threads = 1;
};

BenchConfig parse_config(std::istream& in, BenchConfig base = {});
BenchConfig load_config(const std::filesystem::path& path, BenchConfig base = {});

}  // namespace rotseq
