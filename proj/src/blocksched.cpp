#include "rotseq/blocksched.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <istream>
#include <string>
#include <thread>

#include "rotseq/error.hpp"
#include "rotseq/rotcore.hpp"

namespace rotseq {

// ---------------------------------------------------------------------------
// Planning

void CacheSpec::validate() const {
  if (T1 == 0 || T2 == 0 || T3 == 0 || S == 0 || line_bytes == 0 || page_bytes == 0) {
    throw UsageError("cache capacities must be positive");
  }
  if (!(T1 <= T2 && T2 <= T3)) {
    throw UsageError("cache capacities must satisfy T1 <= T2 <= T3 (got " +
                     std::to_string(T1) + ", " + std::to_string(T2) + ", " +
                     std::to_string(T3) + ")");
  }
}

std::size_t l1_wave_bound(std::size_t T1, std::size_t m_r, std::size_t k_r) {
  if (T1 < m_r * k_r) return 0;
  return (T1 - m_r * k_r) / (m_r + 2 * k_r);
}

std::size_t l2_chunk_bound(std::size_t T2, std::size_t m_r, std::size_t n_b) {
  if (T2 < m_r * n_b) return 0;
  return (T2 - m_r * n_b) / (m_r + 2 * n_b);
}

std::size_t l3_row_bound(std::size_t T3, std::size_t n_b, std::size_t k_b) {
  if (n_b + k_b == 0) throw UsageError("l3_row_bound needs n_b + k_b > 0");
  return T3 / (n_b + k_b);
}

void BlockPlan::validate_for(const KernelShape& shape) const {
  shape.validate();
  if (n_b < shape.k_r || k_b < shape.k_r) {
    throw UsageError("plan needs n_b >= k_r and k_b >= k_r (n_b = " + std::to_string(n_b) +
                     ", k_b = " + std::to_string(k_b) + ", k_r = " + std::to_string(shape.k_r) +
                     ")");
  }
  if (m_b < shape.m_r || m_b % shape.m_r != 0) {
    throw UsageError("m_b = " + std::to_string(m_b) + " must be a positive multiple of m_r = " +
                     std::to_string(shape.m_r));
  }
}

BlockPlan choose_block_sizes(const CacheSpec& cache, const KernelShape& shape,
                             std::size_t m_b_cap) {
  cache.validate();
  shape.validate();
  const std::size_t m_r = shape.m_r;
  const std::size_t k_r = shape.k_r;

  BlockPlan plan;
  plan.m_b_cap = m_b_cap;
  plan.raw.n_b = l1_wave_bound(cache.T1, m_r, k_r);

  const std::size_t reserve = (cache.T1 + 99) / 100;
  const std::size_t n_b_room = l1_wave_bound(cache.T1 - reserve, m_r, k_r);
  if (n_b_room < k_r + 1) {
    throw PlanningError("L1 (T1 = " + std::to_string(cache.T1) + ") cannot hold " +
                        std::to_string(k_r + 1) + " waves of the " + std::to_string(m_r) +
                        "x" + std::to_string(k_r) + " kernel");
  }
  const std::size_t n_b8 = n_b_room / 8 * 8;
  plan.n_b = (n_b8 >= 8 && n_b8 >= k_r) ? n_b8 : n_b_room;

  plan.raw.k_b = l2_chunk_bound(cache.T2, m_r, plan.n_b);
  if (plan.raw.k_b < k_r) {
    throw PlanningError("L2 (T2 = " + std::to_string(cache.T2) + ") cannot hold a chunk of " +
                        std::to_string(k_r) + " sequences at n_b = " + std::to_string(plan.n_b));
  }
  plan.k_b = plan.raw.k_b / k_r * k_r;

  plan.raw.m_b = l3_row_bound(cache.T3, plan.n_b, plan.k_b);
  plan.m_b = std::min(plan.raw.m_b, m_b_cap) / m_r * m_r;
  if (plan.m_b < m_r) {
    throw PlanningError("L3 bound / row-block cap leaves fewer than m_r = " +
                        std::to_string(m_r) + " rows");
  }
  return plan;
}

bool plan_fits(const BlockPlan& plan, const CacheSpec& cache, const KernelShape& shape) {
  const std::size_t m_r = shape.m_r, k_r = shape.k_r;
  return m_r * (plan.n_b + k_r) + 2 * plan.n_b * k_r <= cache.T1 &&
         m_r * (plan.n_b + plan.k_b) + 2 * plan.n_b * plan.k_b <= cache.T2 &&
         plan.m_b * (plan.n_b + plan.k_b) <= cache.T3 && plan.m_b % m_r == 0 &&
         plan.k_b >= k_r && plan.n_b >= k_r;
}

// ---------------------------------------------------------------------------
// Packing

void PackedPanels::Free::operator()(double* p) const { std::free(p); }

PackedPanels::PackedPanels(std::size_t rows, std::size_t cols, std::size_t m_r,
                           std::size_t alignment)
    : alignment_(std::max<std::size_t>(alignment, 64)) {
  if ((alignment_ & (alignment_ - 1)) != 0) {
    throw UsageError("alignment must be a power of two");
  }
  reshape(rows, cols, m_r);
}

void PackedPanels::reshape(std::size_t rows, std::size_t cols, std::size_t m_r) {
  if (m_r == 0) throw UsageError("panel height m_r must be >= 1");
  rows_ = rows, cols_ = cols, m_r_ = m_r;
  if (data_ && size() <= capacity_) return;
  const std::size_t bytes = std::max<std::size_t>(size() * sizeof(double), 1);
  const std::size_t rounded = (bytes + alignment_ - 1) / alignment_ * alignment_;
  data_.reset(static_cast<double*>(std::aligned_alloc(alignment_, rounded)));
  if (!data_) throw std::bad_alloc();
  capacity_ = rounded / sizeof(double);
}

void pack_into(PackedPanels& dst, const MatrixView& a, std::size_t row_start) {
  if (row_start + dst.rows() > a.rows || dst.cols() != a.cols) {
    throw UsageError("packed block does not fit the source matrix");
  }
  const std::size_t m_r = dst.m_r();
  const std::size_t panel_stride = m_r * dst.cols();
  const std::size_t full = dst.rows() / m_r;
  const std::size_t tail = dst.rows() - full * m_r;
  // Column-outer: each source column is read front to back.
  for (std::size_t j = 0; j < a.cols; ++j) {
    const double* src = a.col(j) + row_start;
    double* out = dst.data() + j * m_r;
    for (std::size_t p = 0; p < full; ++p, src += m_r, out += panel_stride) {
      std::memcpy(out, src, m_r * sizeof(double));
    }
    if (tail) {
      std::memcpy(out, src, tail * sizeof(double));
      std::fill(out + tail, out + m_r, 0.0);
    }
  }
}

PackedPanels pack_row_block(const MatrixView& a, std::size_t row_start, std::size_t row_count,
                            std::size_t m_r, std::size_t alignment) {
  if (row_start + row_count > a.rows) {
    throw UsageError("row range [" + std::to_string(row_start) + ", " +
                     std::to_string(row_start + row_count) + ") exceeds " +
                     std::to_string(a.rows) + " rows");
  }
  PackedPanels out(row_count, a.cols, m_r, alignment);
  pack_into(out, a, row_start);
  return out;
}

void unpack_row_block(const PackedPanels& panels, MatrixView a, std::size_t row_start) {
  if (panels.cols() != a.cols || row_start + panels.rows() > a.rows) {
    throw UsageError("packed block (" + std::to_string(panels.rows()) + "x" +
                     std::to_string(panels.cols()) + ") does not fit at row " +
                     std::to_string(row_start) + " of " + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols));
  }
  const std::size_t m_r = panels.m_r();
  const std::size_t panel_stride = m_r * panels.cols();
  for (std::size_t j = 0; j < a.cols; ++j) {
    double* dst = a.col(j) + row_start;
    const double* in = panels.data() + j * m_r;
    for (std::size_t r0 = 0; r0 < panels.rows(); r0 += m_r, in += panel_stride) {
      std::memcpy(dst + r0, in, std::min(m_r, panels.rows() - r0) * sizeof(double));
    }
  }
}

std::vector<RowRange> partition_rows(std::size_t m, std::size_t threads, std::size_t m_r) {
  if (threads < 1) throw UsageError("partition_rows needs threads >= 1");
  if (m_r < 1) throw UsageError("partition_rows needs m_r >= 1");
  const std::size_t panels = (m + m_r - 1) / m_r;
  const std::size_t base = panels / threads;
  const std::size_t extra = panels % threads;
  std::vector<RowRange> out;
  out.reserve(threads);
  std::size_t row = 0;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t share = (base + (t < extra ? 1 : 0)) * m_r;
    const std::size_t end = std::min(m, row + share);
    out.push_back({row, end});
    row = end;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loop nest

void TileBuffer::gather(const CoeffView& coeffs, std::size_t p0, std::size_t q, std::size_t k_r,
                        std::size_t w0, std::size_t n_waves) {
  c_.resize(n_waves * k_r);
  s_.resize(n_waves * k_r);
  for (std::size_t w = 0; w < n_waves; ++w) {
    for (std::size_t l = 0; l < k_r; ++l) {
      const std::size_t j = w0 + w - q - l;
      c_[w * k_r + l] = coeffs.cos(j, p0 + q + l);
      s_[w * k_r + l] = coeffs.sin(j, p0 + q + l);
    }
  }
}

void for_each_kernel_call(std::size_t n, const CoeffView& coeffs, const BlockPlan& plan,
                          std::size_t k_r, std::size_t panels, std::size_t row_block,
                          const std::function<void(std::size_t, const KernelCall&)>& call,
                          const std::function<void(const BlockEvent&)>& event) {
  const std::size_t k = coeffs.cols;
  if (n < 2 || k == 0 || panels == 0) return;
  const std::size_t step = std::min(plan.k_b, n - 1);
  std::vector<TileBuffer> tiles;

  for (std::size_t p0 = 0; p0 < k; p0 += step) {
    const std::size_t kb = std::min(step, k - p0);
    const CoeffView chunk = coeffs.block(0, p0, n - 1, kb);

    if (kb > 1) {
      if (event) event({row_block, p0, Phase::Startup, 0, kb - 1});
      for (std::size_t pi = 0; pi < panels; ++pi) {
        call(pi, {Phase::Startup, 0, kb - 1, 1, chunk.c, chunk.s, p0});
      }
    }

    const std::size_t groups = (kb + k_r - 1) / k_r;
    tiles.resize(groups);
    for (std::size_t w0 = kb - 1; w0 + 1 < n; w0 += plan.n_b) {
      const std::size_t nw = std::min(plan.n_b, n - 1 - w0);
      if (event) event({row_block, p0, Phase::Pipeline, w0, nw});
      for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t q = g * k_r;
        tiles[g].gather(coeffs, p0, q, std::min(k_r, kb - q), w0, nw);
      }
      for (std::size_t pi = 0; pi < panels; ++pi) {
        for (std::size_t g = 0; g < groups; ++g) {
          const std::size_t q = g * k_r;
          const std::size_t krg = std::min(k_r, kb - q);
          call(pi, {Phase::Pipeline, w0 + 1 - q - krg, nw, krg, tiles[g].c(), tiles[g].s(),
                    p0 + q});
        }
      }
    }

    if (kb > 1) {
      if (event) event({row_block, p0, Phase::Shutdown, n - 1, kb - 1});
      for (std::size_t pi = 0; pi < panels; ++pi) {
        call(pi, {Phase::Shutdown, 0, kb - 1, 1, chunk.c, chunk.s, p0});
      }
    }
  }
}

namespace {

/// Coefficient view of one chunk rebuilt from a KernelCall.
CoeffView chunk_of(const KernelCall& kc, const CoeffView& coeffs, std::size_t kb) {
  return {kc.c, kc.s, coeffs.rows, kb, coeffs.ld};
}

struct PanelRunner {
  const CoeffView& coeffs;
  const BlockPlan& plan;
  const KernelShape& shape;
  TransformKind kind;
  std::size_t n;

  void operator()(PanelView pv, const KernelCall& kc) const {
    switch (kc.phase) {
      case Phase::Startup:
      case Phase::Shutdown: {
        const CoeffView chunk = chunk_of(kc, coeffs, kc.n_waves + 1);
        kernel_edge_apply(pv, chunk,
                          kc.phase == Phase::Startup ? EdgeTriangle::Startup
                                                     : EdgeTriangle::Shutdown,
                          shape, kind);
        break;
      }
      case Phase::Pipeline: {
        KernelShape s = shape;
        s.k_r = kc.k_r;
        const std::size_t len = kc.n_waves * kc.k_r;
        kernel_wave_apply(pv.shifted(kc.first_col), {kc.c, len}, {kc.s, len}, kc.n_waves, s,
                          kind);
        break;
      }
    }
  }
};

/// Runs `work(range)` for every non-empty range, one thread per extra range.
template <class Work>
void run_partitioned(const std::vector<RowRange>& ranges, Work&& work) {
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(ranges.size());
  for (std::size_t t = 1; t < ranges.size(); ++t) {
    if (ranges[t].size() == 0) continue;
    pool.emplace_back([&, t] {
      try {
        work(ranges[t]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  try {
    if (!ranges.empty() && ranges[0].size() > 0) work(ranges[0]);
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_blocked_args(std::size_t cols, const RotationSequence& seq, const BlockPlan& plan,
                        const KernelShape& shape, std::size_t threads) {
  if (seq.n() != cols) {
    throw UsageError("sequence acts on " + std::to_string(seq.n()) +
                     " columns but the matrix has " + std::to_string(cols));
  }
  plan.validate_for(shape);
  if (threads < 1) throw UsageError("threads must be >= 1");
}

}  // namespace

void apply_blocked(MatrixView a, const RotationSequence& seq, const BlockPlan& plan,
                   const KernelShape& shape, TransformKind kind, std::size_t threads) {
  check_blocked_args(a.cols, seq, plan, shape, threads);
  if (a.rows == 0 || seq.k() == 0) return;
  const CoeffView coeffs = seq.view();
  const std::size_t n = seq.n();
  const PanelRunner run{coeffs, plan, shape, kind, n};

  run_partitioned(partition_rows(a.rows, threads, shape.m_r), [&](const RowRange& range) {
    PackedPanels buf;
    for (std::size_t r0 = range.begin; r0 < range.end; r0 += plan.m_b) {
      const std::size_t rows = std::min(plan.m_b, range.end - r0);
      buf.reshape(rows, n, shape.m_r);
      pack_into(buf, a, r0);
      for_each_kernel_call(n, coeffs, plan, shape.k_r, buf.panels(),
                           r0 / plan.m_b, [&](std::size_t pi, const KernelCall& kc) {
                             run(buf.panel(pi), kc);
                           });
      unpack_row_block(buf, a, r0);
    }
  });
}

void apply_blocked_packed(PackedPanels& a, const RotationSequence& seq, const BlockPlan& plan,
                          const KernelShape& shape, TransformKind kind, std::size_t threads) {
  check_blocked_args(a.cols(), seq, plan, shape, threads);
  if (a.m_r() != shape.m_r) {
    throw UsageError("packed panel height " + std::to_string(a.m_r()) + " != m_r " +
                     std::to_string(shape.m_r));
  }
  if (a.rows() == 0 || seq.k() == 0) return;
  const CoeffView coeffs = seq.view();
  const std::size_t n = seq.n();
  const PanelRunner run{coeffs, plan, shape, kind, n};

  run_partitioned(partition_rows(a.rows(), threads, shape.m_r), [&](const RowRange& range) {
    for (std::size_t r0 = range.begin; r0 < range.end; r0 += plan.m_b) {
      const std::size_t rows = std::min(plan.m_b, range.end - r0);
      const std::size_t first_panel = r0 / shape.m_r;
      const std::size_t panels = (rows + shape.m_r - 1) / shape.m_r;
      for_each_kernel_call(n, coeffs, plan, shape.k_r, panels, r0 / plan.m_b,
                           [&](std::size_t pi, const KernelCall& kc) {
                             run(a.panel(first_panel + pi), kc);
                           });
    }
  });
}

void apply_blocked(MatrixView a, PackedPanels* packed, bool prepacked,
                   const RotationSequence& seq, const BlockPlan& plan, const KernelShape& shape,
                   TransformKind kind, std::size_t threads) {
  if (prepacked) {
    if (!packed) throw UsageError("prepacked run needs a packed matrix");
    apply_blocked_packed(*packed, seq, plan, shape, kind, threads);
  } else {
    apply_blocked(a, seq, plan, shape, kind, threads);
  }
}

void for_each_sweep_step(std::size_t m, std::size_t n, std::size_t k, const BlockPlan& plan,
                         const std::function<void(const SweepStep&)>& f) {
  if (plan.n_b < 1 || plan.k_b < 1 || plan.m_b < 1) {
    throw UsageError("block sweep needs n_b, k_b, m_b >= 1");
  }
  if (m == 0 || n < 2 || k == 0) return;
  const std::size_t step = std::min(plan.k_b, n - 1);

  for (std::size_t r0 = 0; r0 < m; r0 += plan.m_b) {
    const RowRange rows{r0, std::min(m, r0 + plan.m_b)};
    for (std::size_t p0 = 0; p0 < k; p0 += step) {
      const std::size_t kb = std::min(step, k - p0);
      // Chunk-local waves w, lanes ascending: (j, p) = (w - l, p0 + l).
      auto triangle = [&](std::size_t w_begin, std::size_t w_end) {
        for (std::size_t w = w_begin; w < w_end; ++w) {
          const std::size_t l_lo = w + 2 > n ? w + 2 - n : 0;
          const std::size_t l_hi = std::min(kb - 1, w);
          for (std::size_t l = l_lo; l <= l_hi; ++l) f({rows, w - l, p0 + l, 2, 1});
        }
      };
      triangle(0, kb - 1);
      for (std::size_t w0 = kb - 1; w0 + 1 < n; w0 += plan.n_b) {
        const std::size_t nw = std::min(plan.n_b, n - 1 - w0);
        f({rows, w0 + 1 - kb, p0, nw + kb, kb});
      }
      triangle(n - 1, n + kb - 2);
    }
  }
}

void apply_block_sweep(MatrixView a, const RotationSequence& seq, const BlockPlan& plan,
                       TransformKind kind, Arith arith) {
  if (seq.n() != a.cols) {
    throw UsageError("sequence acts on " + std::to_string(seq.n()) +
                     " columns but the matrix has " + std::to_string(a.cols));
  }
  const CoeffView coeffs = seq.view();
  for_each_sweep_step(a.rows, seq.n(), seq.k(), plan, [&](const SweepStep& st) {
    apply_block(a.block(st.rows.begin, st.j0, st.rows.size(), st.n_cols),
                coeffs.block(st.j0, st.p0, st.n_cols - 1, st.k), kind, arith);
  });
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

BenchConfig parse_config(std::istream& in, BenchConfig cfg) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string text = trim(line.substr(eq + 1));
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw UsageError("config line " + std::to_string(lineno) + ": '" + text +
                       "' is not a non-negative integer");
    }
    if (key == "T1") cfg.cache.T1 = value;
    else if (key == "T2") cfg.cache.T2 = value;
    else if (key == "T3") cfg.cache.T3 = value;
    else if (key == "S") cfg.cache.S = value;
    else if (key == "line_bytes") cfg.cache.line_bytes = value;
    else if (key == "page_bytes") cfg.cache.page_bytes = value;
    else if (key == "m_b_cap") cfg.m_b_cap = value;
    else if (key == "threads") cfg.threads = value;
    else throw UsageError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return cfg;
}

BenchConfig load_config(const std::filesystem::path& path, BenchConfig base) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  return parse_config(in, base);
}

}  // namespace rotseq
