#include "rotseq/perfmodel.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "kernels/kernel_set.hpp"
#include "rotseq/error.hpp"
#include "rotseq/rotcore.hpp"

namespace rotseq {

namespace {

void check_block_params(std::size_t m_b, std::size_t n_b, std::size_t k_b) {
  if (k_b < 1 || m_b < 1) throw UsageError("memory model needs m_b >= 1 and k_b >= 1");
  if (n_b <= k_b) {
    throw UsageError("memory model needs n_b > k_b (n_b = " + std::to_string(n_b) +
                     ", k_b = " + std::to_string(k_b) + ")");
  }
}

double rotations_in_block(std::size_t m_b, std::size_t n_b, std::size_t k_b) {
  return static_cast<double>(m_b) * static_cast<double>(n_b - k_b) * static_cast<double>(k_b);
}

MemOpReport finish(MemOpReport r) {
  r.total = r.loads + r.stores;
  r.factor = r.total / rotations_in_block(r.m_b, r.n_b, r.k_b);
  return r;
}

}  // namespace

const char* to_string(Formula f) {
  switch (f) {
    case Formula::Basic: return "basic";
    case Formula::Fused: return "fused";
    case Formula::Kernel: return "kernel";
  }
  return "?";
}

MemOpReport memops_basic(std::size_t m_b, std::size_t n_b, std::size_t k_b) {
  check_block_params(m_b, n_b, k_b);
  const double R = rotations_in_block(m_b, n_b, k_b);
  const double coef = 2.0 * static_cast<double>(n_b - k_b) * static_cast<double>(k_b);
  MemOpReport r;
  r.formula = Formula::Basic;
  r.m_b = m_b, r.n_b = n_b, r.k_b = k_b;
  r.loads = 2 * R + coef;
  r.stores = 2 * R;
  return finish(r);
}

MemOpReport memops_fused(std::size_t n_r, std::size_t k_r, std::size_t m_b, std::size_t n_b,
                         std::size_t k_b) {
  if (n_r < 1 || k_r < 1) throw UsageError("fused model needs n_r, k_r >= 1");
  check_block_params(m_b, n_b, k_b);
  const double R = rotations_in_block(m_b, n_b, k_b);
  const double cols = 1.0 / static_cast<double>(n_r) + 1.0 / static_cast<double>(k_r);
  MemOpReport r;
  r.formula = Formula::Fused;
  r.n_r = n_r, r.k_r = k_r;
  r.m_b = m_b, r.n_b = n_b, r.k_b = k_b;
  r.loads = (cols + 2.0 / static_cast<double>(m_b)) * R;
  r.stores = cols * R;
  return finish(r);
}

MemOpReport memops_kernel(std::size_t k_r, std::size_t m_r, std::size_t m_b, std::size_t n_b,
                          std::size_t k_b) {
  if (m_r < 1 || k_r < 1) throw UsageError("kernel model needs m_r, k_r >= 1");
  check_block_params(m_b, n_b, k_b);
  const double R = rotations_in_block(m_b, n_b, k_b);
  const double cols = 1.0 / static_cast<double>(k_r) + 1.0 / static_cast<double>(n_b);
  MemOpReport r;
  r.formula = Formula::Kernel;
  r.k_r = k_r, r.m_r = m_r;
  r.m_b = m_b, r.n_b = n_b, r.k_b = k_b;
  r.loads = (cols + 2.0 / static_cast<double>(m_r)) * R;
  r.stores = cols * R;
  return finish(r);
}

std::size_t fused_register_count(std::size_t n_r, std::size_t k_r) {
  return 2 * n_r * k_r + k_r + n_r;
}

IoReport io_models(double m, double n, double k, double S, double m_b, double k_b) {
  if (!(m > 0 && n > 0 && k > 0 && S > 0 && m_b > 0 && k_b > 0)) {
    throw UsageError("I/O model parameters must be positive");
  }
  if (m_b * k_b > S) {
    std::ostringstream msg;
    msg << "m_b * k_b = " << m_b * k_b << " exceeds fast memory S = " << S;
    throw ModelError(msg.str());
  }
  IoReport r;
  const double mnk = m * n * k;
  r.flops = 6 * mnk;
  r.lower_bound = mnk / std::sqrt(S);
  r.wavefront_io = mnk / (m_b * k_b) * (2 * m_b + 2 * k_b);
  r.op_intensity_bound = 6 * std::sqrt(S);
  r.op_intensity_wavefront = r.flops / r.wavefront_io;
  return r;
}

double exact_flops(std::size_t m, std::size_t n, std::size_t k) {
  if (n < 2) return 0;
  return 6.0 * static_cast<double>(m) * static_cast<double>(n - 1) * static_cast<double>(k);
}

// ---------------------------------------------------------------------------
// Instrumented runs

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Naive: return "naive";
    case Variant::Wavefront: return "wavefront";
    case Variant::Blocked: return "blocked";
    case Variant::Fused: return "fused";
    case Variant::Kernel: return "kernel";
    case Variant::KernelPrepacked: return "kernel-prepacked";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::Naive, Variant::Wavefront, Variant::Blocked, Variant::Fused,
                    Variant::Kernel, Variant::KernelPrepacked}) {
    if (name == to_string(v)) return v;
  }
  throw UsageError("unknown algorithm '" + name +
                   "' (expected naive, wavefront, blocked, fused, kernel, kernel-prepacked)");
}

namespace {

class CountingRun {
 public:
  CountingRun(const RotationSequence& seq, TransformKind kind)
      : seq_(seq), kind_(kind), pair_(kernels::strict_kernel_set(kind).pair) {}

  Counters& counters() { return out_; }

  void pair(MatrixView a, std::size_t row0, std::size_t rows, std::size_t j, std::size_t p,
            bool record) {
    pair_(a.col(j) + row0, a.col(j + 1) + row0, rows, seq_.c(j, p), seq_.s(j, p));
    out_.a_loads += 2 * rows;
    out_.a_stores += 2 * rows;
    out_.coef_loads += 2;
    out_.row_rotations += rows;
    ++out_.kernel_calls;
    if (record) out_.order.push_back({j, p});
  }

  void fused(MatrixView a, std::size_t n_r, std::size_t k_r) {
    const std::size_t n = seq_.n();
    const std::size_t full = n_r * k_r;
    std::vector<double> c(full), s(full);
    std::vector<std::uint8_t> first(full);
    std::vector<double*> cols(n_r + k_r);
    for_each_fused_group(n, seq_.k(), n_r, k_r, [&](const FusedGroup& g) {
      const auto members = fused_group_members(g, n, n_r);
      if (members.size() != full || members.size() == 1) {
        for (const auto& r : members) pair(a, 0, a.rows, r.j, r.p, true);
        return;
      }
      const std::size_t col0 = g.anchor + 1 - k_r;
      for (std::size_t t = 0; t < full; ++t) {
        c[t] = seq_.c(members[t].j, members[t].p);
        s[t] = seq_.s(members[t].j, members[t].p);
        first[t] = static_cast<std::uint8_t>(members[t].j - col0);
        out_.order.push_back(members[t]);
      }
      for (std::size_t u = 0; u < n_r + k_r; ++u) cols[u] = a.col(col0 + u);
      kernels::counted_fused(kind_, cols.data(), n_r + k_r, a.rows, first.data(), c.data(),
                             s.data(), full, mem_);
      out_.row_rotations += full * a.rows;
      ++out_.kernel_calls;
      sync();
    });
  }

  /// One packed row block through the kernel loop nest.
  void kernel_block(PackedPanels& packed, std::size_t first_panel, std::size_t panels,
                    std::size_t block_rows, std::size_t row_block, const BlockPlan& plan,
                    std::size_t k_r) {
    const CoeffView coeffs = seq_.view();
    const std::size_t n = seq_.n();
    const std::size_t m_r = packed.m_r();
    for_each_kernel_call(
        n, coeffs, plan, k_r, panels, row_block,
        [&](std::size_t pi, const KernelCall& kc) {
          PanelView pv = packed.panel(first_panel + pi);
          const std::size_t live = std::min(m_r, block_rows - pi * m_r);
          const bool record = row_block == 0 && pi == 0;
          auto lane_run = [&](std::size_t col, const double* c, const double* s,
                              std::size_t waves, std::size_t lanes) {
            kernels::counted_wave(kind_, pv.col(col), m_r, c, s, waves, lanes, mem_);
            out_.row_rotations += live * waves * lanes;
            ++out_.kernel_calls;
          };
          if (kc.phase == Phase::Pipeline) {
            lane_run(kc.first_col, kc.c, kc.s, kc.n_waves, kc.k_r);
            if (record) {
              for (std::size_t w = 0; w < kc.n_waves; ++w) {
                for (std::size_t l = 0; l < kc.k_r; ++l) {
                  out_.order.push_back({kc.first_col + w + kc.k_r - 1 - l, kc.p0 + l});
                }
              }
            }
          } else {
            // Triangles run lane by lane with one-lane waves.
            const std::size_t kb = kc.n_waves + 1;
            const bool startup = kc.phase == Phase::Startup;
            for (std::size_t l = startup ? 0 : 1; startup ? l + 1 < kb : l < kb; ++l) {
              const std::size_t j0 = startup ? 0 : n - 1 - l;
              const std::size_t waves = startup ? kb - 1 - l : l;
              lane_run(j0, kc.c + l * coeffs.ld + j0, kc.s + l * coeffs.ld + j0, waves, 1);
              if (record) {
                for (std::size_t w = 0; w < waves; ++w) out_.order.push_back({j0 + w, kc.p0 + l});
              }
            }
          }
          sync();
        },
        [&](const BlockEvent& ev) { out_.blocks.push_back(ev); });
  }

 private:
  void sync() {
    out_.a_loads += mem_.a_loads;
    out_.a_stores += mem_.a_stores;
    out_.coef_loads += mem_.coef_loads;
    mem_ = {};
  }

  const RotationSequence& seq_;
  TransformKind kind_;
  kernels::PairFn pair_;
  kernels::MemCounts mem_;
  Counters out_;
};

}  // namespace

Counters instrumented_apply(Variant variant, MatrixView a, const RotationSequence& seq,
                            const InstrumentOptions& opt) {
  if (seq.n() != a.cols) {
    throw UsageError("sequence acts on " + std::to_string(seq.n()) +
                     " columns but the matrix has " + std::to_string(a.cols));
  }
  if (a.rows * a.cols > kInstrumentLimit) {
    throw UsageError("instrumented runs are limited to m * n <= " +
                     std::to_string(kInstrumentLimit) + " (got " +
                     std::to_string(a.rows * a.cols) + ")");
  }
  const std::size_t n = seq.n();
  const std::size_t k = seq.k();
  CountingRun run(seq, opt.kind);
  if (a.rows == 0) return run.counters();

  switch (variant) {
    case Variant::Naive:
      for_each_naive(n, k, [&](std::size_t j, std::size_t p) { run.pair(a, 0, a.rows, j, p, true); });
      break;
    case Variant::Wavefront:
      if (k > n - 1) throw UsageError("wavefront needs k <= n-1; use the blocked driver");
      for_each_wavefront(n, k,
                         [&](std::size_t j, std::size_t p) { run.pair(a, 0, a.rows, j, p, true); });
      break;
    case Variant::Blocked:
      for_each_sweep_step(a.rows, n, k, opt.plan, [&](const SweepStep& st) {
        for_each_block(st.n_cols - 1, st.k, [&](std::size_t jl, std::size_t pl) {
          run.pair(a, st.rows.begin, st.rows.size(), st.j0 + jl, st.p0 + pl,
                   st.rows.begin == 0);
        });
      });
      break;
    case Variant::Fused:
      if (opt.fused_n_r < 1 || opt.fused_k_r < 1 || opt.fused_n_r + opt.fused_k_r > 64) {
        throw UsageError("fused group sizes must be >= 1 and span at most 64 columns");
      }
      run.fused(a, opt.fused_n_r, opt.fused_k_r);
      break;
    case Variant::Kernel:
    case Variant::KernelPrepacked: {
      opt.plan.validate_for(opt.shape);
      const std::size_t m_r = opt.shape.m_r;
      const BlockPlan& plan = opt.plan;
      if (variant == Variant::KernelPrepacked) {
        PackedPanels packed = pack_row_block(a, 0, a.rows, m_r);
        for (std::size_t r0 = 0; r0 < a.rows; r0 += plan.m_b) {
          const std::size_t rows = std::min(plan.m_b, a.rows - r0);
          run.kernel_block(packed, r0 / m_r, (rows + m_r - 1) / m_r, rows, r0 / plan.m_b, plan,
                           opt.shape.k_r);
        }
        unpack_row_block(packed, a, 0);
      } else {
        for (std::size_t r0 = 0; r0 < a.rows; r0 += plan.m_b) {
          const std::size_t rows = std::min(plan.m_b, a.rows - r0);
          PackedPanels packed = pack_row_block(a, r0, rows, m_r);
          run.kernel_block(packed, 0, packed.panels(), rows, r0 / plan.m_b, plan, opt.shape.k_r);
          unpack_row_block(packed, a, r0);
        }
      }
      break;
    }
  }
  return run.counters();
}

bool order_respects_dependencies(const std::vector<RotIndex>& order, std::size_t n,
                                 std::size_t k) {
  if (n < 2) return order.empty();
  const std::size_t rows = n - 1;
  if (order.size() != rows * k) return false;
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> pos(rows * k, kUnset);
  for (std::size_t t = 0; t < order.size(); ++t) {
    const auto [j, p] = order[t];
    if (j >= rows || p >= k || pos[j + p * rows] != kUnset) return false;
    pos[j + p * rows] = t;
  }
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < rows; ++j) {
      const std::size_t here = pos[j + p * rows];
      if (j > 0 && pos[j - 1 + p * rows] > here) return false;
      if (p > 0 && j + 1 < rows && pos[j + 1 + (p - 1) * rows] > here) return false;
    }
  }
  return true;
}

BlockMeasurement instrumented_block(Formula formula, std::size_t m_b, std::size_t n_b,
                                    std::size_t k_b, const KernelShape& shape) {
  check_block_params(m_b, n_b, k_b);
  const std::size_t waves = n_b - k_b;
  // A pipeline block spans waves + k_b = n_b columns.
  DenseMatrix a = DenseMatrix::random(m_b, n_b, 7);
  const RotationSequence seq = generate_sequence(n_b, k_b, 11);

  BlockMeasurement out;
  std::uint64_t loads = 0, stores = 0;
  switch (formula) {
    case Formula::Basic: {
      out.model = memops_basic(m_b, n_b, k_b);
      CountingRun run(seq, TransformKind::Rotation);
      for_each_block(n_b - 1, k_b, [&](std::size_t j, std::size_t p) {
        run.pair(a.view(), 0, m_b, j, p, false);
      });
      const Counters& c = run.counters();
      loads = c.a_loads + c.coef_loads;
      stores = c.a_stores;
      break;
    }
    case Formula::Kernel: {
      shape.validate();
      if (m_b % shape.m_r != 0) throw UsageError("instrumented kernel block needs m_r | m_b");
      out.model = memops_kernel(shape.k_r, shape.m_r, m_b, n_b, k_b);
      PackedPanels packed = pack_row_block(a.view(), 0, m_b, shape.m_r);
      const std::size_t groups = (k_b + shape.k_r - 1) / shape.k_r;
      std::vector<TileBuffer> tiles(groups);
      for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t q = g * shape.k_r;
        tiles[g].gather(seq.view(), 0, q, std::min(shape.k_r, k_b - q), k_b - 1, waves);
      }
      kernels::MemCounts mem;
      for (std::size_t pi = 0; pi < packed.panels(); ++pi) {
        for (std::size_t g = 0; g < groups; ++g) {
          const std::size_t q = g * shape.k_r;
          const std::size_t krg = std::min(shape.k_r, k_b - q);
          kernels::counted_wave(TransformKind::Rotation, packed.panel(pi).col(k_b - q - krg),
                                shape.m_r, tiles[g].c(), tiles[g].s(), waves, krg, mem);
        }
      }
      loads = mem.a_loads + mem.coef_loads;
      stores = mem.a_stores;
      break;
    }
    case Formula::Fused:
      throw UsageError("instrumented blocks cover the basic and kernel formulas");
  }
  out.measured = out.model;
  out.measured.loads = static_cast<double>(loads);
  out.measured.stores = static_cast<double>(stores);
  out.measured = finish(out.measured);
  out.relative_gap = std::abs(out.measured.total - out.model.total) / out.model.total;
  return out;
}

// ---------------------------------------------------------------------------
// Output

std::string memops_csv_header() {
  return "formula_id,n_r,k_r,m_r,m_b,n_b,k_b,loads,stores,total,factor";
}

std::string memops_csv_row(const MemOpReport& r) {
  std::ostringstream os;
  os << std::setprecision(12) << to_string(r.formula) << ',' << r.n_r << ',' << r.k_r << ','
     << r.m_r << ',' << r.m_b << ',' << r.n_b << ',' << r.k_b << ',' << r.loads << ','
     << r.stores << ',' << r.total << ',' << r.factor;
  return os.str();
}

void print_memops(std::ostream& os, const MemOpReport& r) {
  std::ostringstream params;
  if (r.n_r) params << "n_r=" << r.n_r << ' ';
  if (r.k_r) params << "k_r=" << r.k_r << ' ';
  if (r.m_r) params << "m_r=" << r.m_r << ' ';
  params << "m_b=" << r.m_b << " n_b=" << r.n_b << " k_b=" << r.k_b;
  os << std::left << std::setw(7) << to_string(r.formula) << std::setw(40) << params.str()
     << std::right << std::setprecision(10) << " loads " << std::setw(14) << r.loads
     << "  stores " << std::setw(14) << r.stores << "  total " << std::setw(14) << r.total
     << "  factor " << std::setprecision(6) << r.factor << '\n';
}

void print_io(std::ostream& os, const IoReport& r) {
  os << std::setprecision(10) << "flops                   " << r.flops << '\n'
     << "I/O lower bound         " << r.lower_bound << '\n'
     << "wavefront I/O           " << r.wavefront_io << '\n'
     << "intensity bound         " << r.op_intensity_bound << '\n'
     << "wavefront intensity     " << r.op_intensity_wavefront << '\n';
}

}  // namespace rotseq
