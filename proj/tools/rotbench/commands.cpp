#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <vector>

namespace rotbench {

namespace {

struct MatrixFree {
  void operator()(rotseq_matrix* m) const { rotseq_matrix_destroy(m); }
};
struct SequenceFree {
  void operator()(rotseq_sequence* s) const { rotseq_sequence_destroy(s); }
};
struct PackedFree {
  void operator()(rotseq_packed* p) const { rotseq_packed_destroy(p); }
};
using Matrix = std::unique_ptr<rotseq_matrix, MatrixFree>;
using Sequence = std::unique_ptr<rotseq_sequence, SequenceFree>;
using Packed = std::unique_ptr<rotseq_packed, PackedFree>;

/// Thrown for any non-OK status; carries the library message.
struct Failure {
  rotseq_status status;
  std::string message;
};

void check(rotseq_status st) {
  if (st != ROTSEQ_OK) throw Failure{st, rotseq_last_error()};
}

int report(const Failure& f) {
  std::cerr << "rotbench: " << rotseq_status_name(f.status) << ": " << f.message << '\n';
  return kUsage;
}

// Empty path or "-" means the fallback stream.
std::ostream& csv_stream(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw Failure{ROTSEQ_E_USAGE, "cannot write " + path};
  return file;
}

Matrix random_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
  rotseq_matrix* out = nullptr;
  check(rotseq_matrix_random(m, n, seed, &out));
  return Matrix(out);
}

Matrix copy(const Matrix& src) {
  rotseq_matrix* out = nullptr;
  check(rotseq_matrix_copy(src.get(), &out));
  return Matrix(out);
}

Sequence sequence(std::size_t n, std::size_t k, std::uint64_t seed) {
  rotseq_sequence* out = nullptr;
  check(rotseq_sequence_generate(n, k, seed, &out));
  return Sequence(out);
}

rotseq_comparison compare(const Matrix& x, const Matrix& y, bool strict, std::size_t k) {
  rotseq_comparison cmp{};
  check(rotseq_compare(x.get(), y.get(), strict ? 1 : 0, k, &cmp));
  return cmp;
}

rotseq_options base_options(const Args& a) {
  rotseq_options o;
  rotseq_options_defaults(&o);
  check(rotseq_algo_from_name(a.algo.c_str(), &o.algo));
  o.kind = a.kind == "reflector" ? ROTSEQ_REFLECTOR : ROTSEQ_ROTATION;
  o.arith = a.strict ? ROTSEQ_STRICT : ROTSEQ_FAST;
  o.shape = a.shape;
  o.plan = a.plan;
  o.cache = a.cache;
  o.threads = a.threads;
  return o;
}

/// One application of opts.algo; prepacked runs pack first and unpack after.
void apply_once(const Matrix& a, const Sequence& seq, const rotseq_options& o) {
  check(rotseq_apply(a.get(), seq.get(), &o));
}

std::vector<std::size_t> parse_sweep(const std::string& text) {
  std::size_t v[3] = {};
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int i = 0; i < 3; ++i) {
    const auto [next, ec] = std::from_chars(p, end, v[i]);
    const bool last = i == 2;
    if (ec != std::errc() || (!last && (next == end || *next != ':')) || (last && next != end)) {
      throw Failure{ROTSEQ_E_USAGE, "--sweep expects start:stop:step, got '" + text + "'"};
    }
    p = next + 1;
  }
  if (v[2] == 0) throw Failure{ROTSEQ_E_USAGE, "--sweep step must be positive"};
  std::vector<std::size_t> sizes;
  for (std::size_t n = v[0]; n <= v[1]; n += v[2]) sizes.push_back(n);
  return sizes;
}

std::string fmt(double x, int digits = 9) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_run(const Args& args) {
  try {
    const std::vector<std::size_t> sizes =
        args.sweep.empty() ? std::vector<std::size_t>{args.n} : parse_sweep(args.sweep);
    rotseq_options opts = base_options(args);
    if (opts.algo == ROTSEQ_BLOCKED || opts.algo == ROTSEQ_KERNEL ||
        opts.algo == ROTSEQ_KERNEL_PREPACKED) {
      check(rotseq_options_resolve(&opts));
    }

    std::ofstream file;
    std::ostream& csv = csv_stream(args.csv, file, std::cout);
    csv << "n,Flops";
    if (args.csv_extended) csv << ",m,k,algo,threads,seconds,verified";
    csv << '\n';

    bool all_verified = true;
    for (const std::size_t n : sizes) {
      const std::size_t m = args.sweep.empty() && args.m ? args.m : n;
      const Matrix a0 = random_matrix(m, n, args.seed);
      const Sequence seq = sequence(n, args.k, args.seed + 1);

      using clock = std::chrono::steady_clock;
      double best = 0;
      Matrix work = copy(a0);
      for (std::size_t rep = 0; rep <= args.reps; ++rep) {  // rep 0 warms up
        work = copy(a0);
        double seconds = 0;
        if (opts.algo == ROTSEQ_KERNEL_PREPACKED) {
          rotseq_packed* raw = nullptr;
          check(rotseq_pack(work.get(), opts.shape.m_r, &raw));
          Packed packed(raw);
          const auto t0 = clock::now();
          check(rotseq_apply_packed(packed.get(), seq.get(), &opts));
          seconds = std::chrono::duration<double>(clock::now() - t0).count();
          check(rotseq_unpack(packed.get(), work.get()));
        } else {
          const auto t0 = clock::now();
          apply_once(work, seq, opts);
          seconds = std::chrono::duration<double>(clock::now() - t0).count();
        }
        if (rep == 1 || (rep > 1 && seconds < best)) best = seconds;
      }

      const bool check_it = args.verify_all || static_cast<double>(m) * n <= 4e6;
      std::string verified = "skipped";
      if (check_it) {
        Matrix ref = copy(a0);
        rotseq_options naive = opts;
        naive.algo = ROTSEQ_NAIVE;
        naive.arith = ROTSEQ_STRICT;
        apply_once(ref, seq, naive);
        const auto cmp = compare(work, ref, args.strict, args.k);
        verified = cmp.passed ? "yes" : "no";
        if (!cmp.passed) {
          all_verified = false;
          std::cerr << "rotbench: verification failed for " << args.algo << " m=" << m
                    << " n=" << n << " k=" << args.k << " max_abs=" << cmp.max_abs_diff
                    << " frob_rel=" << cmp.frobenius_rel_diff << '\n';
        }
      }

      const double flops = rotseq_exact_flops(m, n, args.k);
      const double gflops = best > 0 ? flops / best / 1e9 : 0.0;
      csv << n << ',' << fmt(gflops);
      if (args.csv_extended) {
        csv << ',' << m << ',' << args.k << ',' << args.algo << ',' << opts.threads << ','
            << fmt(best) << ',' << verified;
      }
      csv << '\n';
      csv.flush();
      std::cerr << "algo=" << args.algo << " kind=" << args.kind << " m=" << m << " n=" << n
                << " k=" << args.k << " threads=" << opts.threads << " reps=" << args.reps
                << " best=" << fmt(best, 6) << "s gflops=" << fmt(gflops, 6)
                << " verified=" << verified << '\n';
    }
    return all_verified ? kOk : kVerifyFailed;
  } catch (const Failure& f) {
    return report(f);
  }
}

// ---------------------------------------------------------------------------

namespace {

struct Case {
  std::string label;
  rotseq_algo algo;
  rotseq_shape shape{16, 2};
  rotseq_plan plan{};
  std::size_t fused_n_r = 2, fused_k_r = 2;
};

std::vector<Case> verify_cases() {
  auto plan = [](std::size_t nb, std::size_t kb, std::size_t mb) {
    rotseq_plan p{};
    p.n_b = nb, p.k_b = kb, p.m_b = mb;
    return p;
  };
  std::vector<Case> cases;
  cases.push_back({"wavefront", ROTSEQ_WAVEFRONT});
  cases.push_back({"blocked(5,3,7)", ROTSEQ_BLOCKED, {16, 2}, plan(5, 3, 7)});
  cases.push_back({"blocked(16,4,32)", ROTSEQ_BLOCKED, {16, 2}, plan(16, 4, 32)});
  cases.push_back({"fused(2x2)", ROTSEQ_FUSED});
  cases.push_back({"fused(3x2)", ROTSEQ_FUSED, {16, 2}, {}, 3, 2});
  cases.push_back({"kernel(16,2)", ROTSEQ_KERNEL, {16, 2}, plan(7, 3, 32)});
  cases.push_back({"kernel(8,5)", ROTSEQ_KERNEL, {8, 5}, plan(6, 7, 24)});
  cases.push_back({"kernel(12,3)", ROTSEQ_KERNEL, {12, 3}, plan(5, 4, 36)});
  cases.push_back({"kernel(4,2)", ROTSEQ_KERNEL, {4, 2}, plan(3, 3, 8)});
  cases.push_back({"kernel-prepacked(16,2)", ROTSEQ_KERNEL_PREPACKED, {16, 2}, plan(9, 5, 16)});
  return cases;
}

}  // namespace

int cmd_verify(const Args& args) {
  try {
    std::vector<rotseq_kind> kinds;
    if (!args.kind_given || args.kind == "rotation") kinds.push_back(ROTSEQ_ROTATION);
    if (!args.kind_given || args.kind == "reflector") kinds.push_back(ROTSEQ_REFLECTOR);
    const rotseq_arith arith = args.strict ? ROTSEQ_STRICT : ROTSEQ_FAST;
    std::size_t total = 0, failed = 0;

    auto run_case = [&](const Case& c, rotseq_kind kind, std::size_t m, std::size_t n,
                        std::size_t k, const Matrix& a0, const Sequence& seq, const Matrix& ref,
                        bool oracle) {
      rotseq_options o;
      rotseq_options_defaults(&o);
      o.algo = c.algo, o.kind = kind, o.arith = arith, o.shape = c.shape, o.plan = c.plan;
      o.cache = args.cache, o.threads = args.threads;
      o.fused_n_r = c.fused_n_r, o.fused_k_r = c.fused_k_r;
      Matrix out = copy(a0);
      apply_once(out, seq, o);
      const auto cmp = compare(out, ref, args.strict && !oracle, k);
      bool ok = cmp.passed;
      if (oracle) ok = cmp.frobenius_rel_diff <= (kind == ROTSEQ_ROTATION ? 1e-12 : 1e-11);
      ++total;
      if (!ok) ++failed;
      std::cout << (ok ? "ok   " : "FAIL ") << std::left << std::setw(24) << c.label
                << (kind == ROTSEQ_ROTATION ? "rotation " : "reflector") << " m=" << m
                << " n=" << n << " k=" << k << (oracle ? " oracle" : "")
                << (cmp.bitwise_equal ? " bitwise" : "") << " max_abs=" << cmp.max_abs_diff
                << " frob_rel=" << cmp.frobenius_rel_diff << '\n';
    };

    const auto cases = verify_cases();
    for (const rotseq_kind kind : kinds) {
      rotseq_options naive;
      rotseq_options_defaults(&naive);
      naive.algo = ROTSEQ_NAIVE, naive.kind = kind, naive.arith = ROTSEQ_STRICT;

      // Equivalence with the naive order.
      for (std::size_t m : {3, 17, 33}) {
        for (std::size_t n : {4, 9, 33, 64}) {
          std::vector<std::size_t> ks{1, 3, std::min<std::size_t>(8, n - 1)};
          std::sort(ks.begin(), ks.end());
          ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
          for (std::size_t k : ks) {
            const Matrix a0 = random_matrix(m, n, args.seed + m * 1000 + n);
            const Sequence seq = sequence(n, k, args.seed + k);
            Matrix ref = copy(a0);
            apply_once(ref, seq, naive);
            for (const auto& c : cases) run_case(c, kind, m, n, k, a0, seq, ref, false);
          }
        }
      }
      // Explicit-matrix oracle.
      for (std::size_t n : {16, 48}) {
        for (std::size_t k : {3, 18}) {
          const Matrix a0 = random_matrix(n, n, args.seed + n);
          const Sequence seq = sequence(n, k, args.seed + k);
          rotseq_matrix* raw = nullptr;
          check(rotseq_oracle_apply(a0.get(), seq.get(), kind, &raw));
          const Matrix ref(raw);
          for (const auto& c : cases) {
            if (c.algo == ROTSEQ_WAVEFRONT && k > n - 1) continue;
            run_case(c, kind, n, n, k, a0, seq, ref, true);
          }
        }
      }
    }
    std::cout << "verify: " << total << " cases, " << failed << " failed\n";
    return failed ? kVerifyFailed : kOk;
  } catch (const Failure& f) {
    return report(f);
  }
}

// ---------------------------------------------------------------------------

int cmd_model(const Args& args) {
  try {
    const rotseq_cache& cache = args.cache;
    rotseq_plan plan = args.plan;
    const bool all_given = plan.n_b && plan.k_b && plan.m_b;
    if (!all_given) {
      rotseq_plan chosen{};
      check(rotseq_plan_choose(&cache, args.shape, &chosen));
      if (!plan.n_b) plan.n_b = chosen.n_b;
      if (!plan.k_b) plan.k_b = chosen.k_b;
      if (!plan.m_b) plan.m_b = chosen.m_b;
    }
    // Bounds along the chain actually used.
    plan.raw_n_b = rotseq_l1_wave_bound(cache.T1, args.shape.m_r, args.shape.k_r);
    plan.raw_k_b = rotseq_l2_chunk_bound(cache.T2, args.shape.m_r, plan.n_b);
    plan.raw_m_b = rotseq_l3_row_bound(cache.T3, plan.n_b, plan.k_b);

    std::ostream& out = std::cout;
    out << "cache   T1=" << cache.T1 << " T2=" << cache.T2 << " T3=" << cache.T3
        << " S=" << cache.S << '\n'
        << "shape   m_r=" << args.shape.m_r << " k_r=" << args.shape.k_r << '\n'
        << "bounds  n_b <= " << plan.raw_n_b << "  k_b <= " << plan.raw_k_b
        << "  m_b <= " << plan.raw_m_b << '\n'
        << "plan    n_b=" << plan.n_b << " k_b=" << plan.k_b << " m_b=" << plan.m_b << '\n';

    if (args.io) {
      const double n = static_cast<double>(args.n);
      const double m = args.m ? static_cast<double>(args.m) : n;
      const double k = static_cast<double>(args.k);
      rotseq_io io{};
      check(rotseq_io_models(m, n, k, static_cast<double>(cache.S),
                             static_cast<double>(plan.m_b), static_cast<double>(plan.k_b), &io));
      out << "io      m=" << fmt(m) << " n=" << fmt(n) << " k=" << fmt(k) << " S=" << cache.S
          << " m_b=" << plan.m_b << " k_b=" << plan.k_b << '\n'
          << "flops                 " << fmt(io.flops, 12) << '\n'
          << "io_lower_bound        " << fmt(io.lower_bound, 12) << '\n'
          << "wavefront_io          " << fmt(io.wavefront_io, 12) << '\n'
          << "io_ratio              " << fmt(io.wavefront_io / io.lower_bound, 12) << '\n'
          << "intensity_bound       " << fmt(io.op_intensity_bound, 12) << '\n'
          << "intensity_wavefront   " << fmt(io.op_intensity_wavefront, 12) << '\n';
      return kOk;
    }

    const std::size_t mb = plan.m_b, nb = plan.n_b, kb = plan.k_b;
    const std::size_t mr = args.shape.m_r, kr = args.shape.k_r;
    struct Row {
      const char* id;
      std::size_t n_r, k_r, m_r;
      rotseq_memops r;
    };
    std::vector<Row> rows(3);
    rows[0] = {"basic", 0, 0, 0, {}};
    rows[1] = {"fused", 2, 2, 0, {}};
    rows[2] = {"kernel", 0, kr, mr, {}};
    check(rotseq_memops_basic(mb, nb, kb, &rows[0].r));
    check(rotseq_memops_fused(2, 2, mb, nb, kb, &rows[1].r));
    check(rotseq_memops_kernel(kr, mr, mb, nb, kb, &rows[2].r));

    out << "memory operations per block (m_b (n_b - k_b) k_b = "
        << fmt(static_cast<double>(mb) * static_cast<double>(nb - kb) * static_cast<double>(kb))
        << " row-rotations)\n";
    for (const auto& row : rows) {
      out << "  " << std::left << std::setw(7) << row.id << std::right << " loads "
          << std::setw(16) << fmt(row.r.loads, 12) << "  stores " << std::setw(16)
          << fmt(row.r.stores, 12) << "  total " << std::setw(16) << fmt(row.r.total, 12)
          << "  factor " << fmt(row.r.factor, 8) << '\n';
    }
    out << "kernel factor as n_b grows: 2/k_r + 2/m_r = "
        << fmt(2.0 / static_cast<double>(kr) + 2.0 / static_cast<double>(mr), 8) << '\n';

    if (!args.csv.empty()) {
      std::ofstream file;
      std::ostream& csv = csv_stream(args.csv, file, out);
      csv << "formula_id,n_r,k_r,m_r,m_b,n_b,k_b,loads,stores,total,factor\n";
      for (const auto& row : rows) {
        csv << row.id << ',' << row.n_r << ',' << row.k_r << ',' << row.m_r << ',' << mb << ','
            << nb << ',' << kb << ',' << fmt(row.r.loads, 12) << ',' << fmt(row.r.stores, 12)
            << ',' << fmt(row.r.total, 12) << ',' << fmt(row.r.factor, 12) << '\n';
      }
    }
    return kOk;
  } catch (const Failure& f) {
    return report(f);
  }
}

}  // namespace rotbench
