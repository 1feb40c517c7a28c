#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

#include "doctest.h"
#include "helpers.hpp"
#include "rotseq/blocksched.hpp"
#include "rotseq/error.hpp"
#include "rotseq/perfmodel.hpp"
#include "rotseq/rotcore.hpp"

using namespace rotseq;
using testutil::same_bits;

namespace {

BlockPlan make_plan(std::size_t n_b, std::size_t k_b, std::size_t m_b) {
  BlockPlan p;
  p.n_b = n_b, p.k_b = k_b, p.m_b = m_b;
  return p;
}

}  // namespace

TEST_SUITE("blocksched") {

TEST_CASE("cache bounds at the reference machine") {
  CHECK(l1_wave_bound(4000, 8, 5) == 220);
  CHECK(l1_wave_bound(4000, 16, 2) == 198);
  CHECK(l2_chunk_bound(32000, 16, 220) == 62);
  CHECK(l3_row_bound(4480000, 216, 60) == 16231);
  CHECK(l1_wave_bound(10, 16, 2) == 0);
}

TEST_CASE("planner on the reference machine") {
  const CacheSpec cache;
  const auto plan = choose_block_sizes(cache, {8, 5});
  // raw bound 220; with 1% of T1 held back (3960 - 40) / 18 = 217 -> 216
  CHECK(plan.raw.n_b == 220);
  CHECK(plan.n_b == 216);
  CHECK(plan.k_b % 5 == 0);
  CHECK(plan.m_b == 4800);
  CHECK(plan.raw.m_b == l3_row_bound(cache.T3, plan.n_b, plan.k_b));
  CHECK(plan_fits(plan, cache, {8, 5}));

  const auto p16 = choose_block_sizes(cache, {16, 2});
  CHECK(p16.n_b % 8 == 0);
  CHECK(p16.k_b % 2 == 0);
  CHECK(p16.m_b % 16 == 0);
  CHECK(plan_fits(p16, cache, {16, 2}));

  const auto capped = choose_block_sizes(cache, {16, 2}, 1000);
  CHECK(capped.m_b == 992);
}

TEST_CASE("planner properties over many caches") {
  std::mt19937_64 rng(77);
  int planned = 0;
  for (int trial = 0; trial < 300; ++trial) {
    CacheSpec c;
    c.T1 = 200 + rng() % 20000;
    c.T2 = c.T1 * (1 + rng() % 64);
    c.T3 = c.T2 * (1 + rng() % 256);
    const KernelShape shape{1 + rng() % 32, 1 + rng() % 6};
    try {
      const auto plan = choose_block_sizes(c, shape);
      CHECK(plan_fits(plan, c, shape));
      CHECK(plan.m_b % shape.m_r == 0);
      CHECK(plan.k_b >= shape.k_r);
      CHECK(plan.n_b >= shape.k_r);
      CHECK(plan.k_b % shape.k_r == 0);
      CHECK_NOTHROW(plan.validate_for(shape));
      ++planned;
    } catch (const PlanningError&) {
      // small caches are allowed to refuse
    }
  }
  CHECK(planned > 200);
  CacheSpec tiny;
  tiny.T1 = 64, tiny.T2 = 64, tiny.T3 = 64;
  CHECK_THROWS_AS(choose_block_sizes(tiny, {16, 2}), PlanningError);
}

TEST_CASE("cache capacity validation") {
  CacheSpec c;
  c.T2 = c.T1 - 1;
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("pack layout") {
  DenseMatrix a(2, 2);
  a(0, 0) = 1, a(1, 0) = 2, a(0, 1) = 3, a(1, 1) = 4;
  const auto p = pack_row_block(a.view(), 0, 2, 2);
  CHECK(p.panels() == 1);
  CHECK(std::vector<double>(p.data(), p.data() + p.size()) == std::vector<double>{1, 2, 3, 4});

  DenseMatrix b(3, 2);
  b(0, 0) = 1, b(1, 0) = 2, b(2, 0) = 5, b(0, 1) = 3, b(1, 1) = 4, b(2, 1) = 6;
  const auto q = pack_row_block(b.view(), 0, 3, 2);
  CHECK(q.panels() == 2);
  CHECK(q.size() == 8);
  CHECK(std::vector<double>(q.data(), q.data() + q.size()) ==
        std::vector<double>{1, 2, 3, 4, 5, 0, 6, 0});
  CHECK(reinterpret_cast<std::uintptr_t>(q.data()) % 64 == 0);
}

TEST_CASE("pack round trip") {
  const DenseMatrix a = DenseMatrix::random(129, 67, 3);
  const auto p = pack_row_block(a.view(), 0, 129, 16);
  CHECK(p.size() == 9 * 16 * 67);
  DenseMatrix b(129, 67);
  unpack_row_block(p, b.view(), 0);
  CHECK(same_bits(a, b));
  for (std::size_t i = 0; i < 129; ++i) CHECK(p.at(i, 66) == a(i, 66));
  // padding rows are zero
  for (std::size_t j = 0; j < 67; ++j)
    for (std::size_t r = 129; r < 144; ++r) CHECK(p.data()[8 * 16 * 67 + j * 16 + (r - 128)] == 0);
}

TEST_CASE("unpack into a strided submatrix leaves other rows alone") {
  DenseMatrix big(40, 9, 48);
  for (std::size_t j = 0; j < 9; ++j)
    for (std::size_t i = 0; i < 40; ++i) big(i, j) = -1.0 - static_cast<double>(i + 100 * j);
  const DenseMatrix before = big;
  const DenseMatrix src = DenseMatrix::random(13, 9, 4);
  const auto p = pack_row_block(src.view(), 0, 13, 8);
  unpack_row_block(p, big.view(), 20);
  for (std::size_t j = 0; j < 9; ++j) {
    for (std::size_t i = 0; i < 40; ++i) {
      if (i >= 20 && i < 33)
        CHECK(big(i, j) == src(i - 20, j));
      else
        CHECK(big(i, j) == before(i, j));
    }
    for (std::size_t i = 40; i < 48; ++i) CHECK(big.data()[i + j * 48] == 0.0);
  }
  // zero-row block
  const auto empty = pack_row_block(src.view(), 5, 0, 8);
  CHECK(empty.size() == 0);
  CHECK_NOTHROW(unpack_row_block(empty, big.view(), 0));
  CHECK_THROWS_AS(pack_row_block(src.view(), 10, 5, 8), UsageError);
  CHECK_THROWS_AS(unpack_row_block(p, big.view(), 30), UsageError);
}

TEST_CASE("pack_into and reshape reuse storage") {
  const DenseMatrix a = DenseMatrix::random(50, 7, 8);
  PackedPanels buf(32, 7, 16);
  const double* before = buf.data();
  pack_into(buf, a.view(), 10);
  CHECK(buf.data() == before);
  for (std::size_t i = 0; i < 32; ++i)
    for (std::size_t j = 0; j < 7; ++j) CHECK(buf.at(i, j) == a(10 + i, j));
  buf.reshape(20, 7, 8);
  CHECK(buf.data() == before);
  CHECK(buf.panels() == 3);
}

TEST_CASE("partition examples") {
  using R = std::vector<RowRange>;
  CHECK(partition_rows(64, 2, 16) == R{{0, 32}, {32, 64}});
  CHECK(partition_rows(80, 3, 16) == R{{0, 32}, {32, 64}, {64, 80}});
  CHECK(partition_rows(10, 4, 16) == R{{0, 10}, {10, 10}, {10, 10}, {10, 10}});
  CHECK(partition_rows(0, 2, 16) == R{{0, 0}, {0, 0}});
}

TEST_CASE("partition invariants") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = rng() % 5000, threads = 1 + rng() % 16, m_r = 1 + rng() % 48;
    const auto parts = partition_rows(m, threads, m_r);
    REQUIRE(parts.size() == threads);
    std::size_t at = 0;
    std::size_t lo = SIZE_MAX, hi = 0;
    for (std::size_t t = 0; t < threads; ++t) {
      CHECK(parts[t].begin == at);
      CHECK(parts[t].end >= parts[t].begin);
      at = parts[t].end;
      if (parts[t].end != m) CHECK(parts[t].size() % m_r == 0);
      if (t + 1 < threads) lo = std::min(lo, parts[t].size()), hi = std::max(hi, parts[t].size());
    }
    CHECK(at == m);
    if (threads > 1) CHECK(hi - lo <= m_r);
  }
}

TEST_CASE("blocked kernel path equals naive") {
  for (auto kind : testutil::kKinds) {
    for (std::size_t m_r : {16u, 8u}) {
      const auto seq = generate_sequence(32, 4, 1);
      DenseMatrix a = DenseMatrix::random(32, 32, 2), b = a;
      apply_naive(a.view(), seq, kind);
      apply_blocked(b.view(), seq, make_plan(8, 2, 16), {m_r, 2}, kind);
      CHECK(same_bits(a, b));
    }
  }
}

TEST_CASE("blocked kernel path over awkward shapes and plans") {
  const std::tuple<std::size_t, std::size_t, std::size_t, KernelShape, BlockPlan> cases[] = {
      {33, 17, 5, {16, 2}, make_plan(7, 3, 32)},    // k_b not dividing k
      {17, 40, 12, {8, 5}, make_plan(6, 7, 24)},    // n_b < k_b
      {50, 9, 20, {12, 3}, make_plan(5, 4, 36)},    // k > n - 1 forces chunks
      {7, 64, 3, {16, 2}, make_plan(9, 5, 16)},     // k < k_b
      {70, 23, 6, {4, 2}, make_plan(3, 3, 8)},      // generic shape
      {96, 30, 9, {48, 1}, make_plan(11, 2, 48)},
      {5, 2, 3, {16, 2}, make_plan(8, 2, 16)},      // n = 2
  };
  for (auto kind : testutil::kKinds) {
    for (const auto& [m, n, k, shape, plan] : cases) {
      const auto seq = generate_sequence(n, k, m + n + k);
      DenseMatrix a = DenseMatrix::random(m, n, m * n), b = a, c = a;
      apply_naive(a.view(), seq, kind);
      apply_blocked(b.view(), seq, plan, shape, kind);
      CHECK_MESSAGE(same_bits(a, b), "m=" << m << " n=" << n << " k=" << k);
      apply_block_sweep(c.view(), seq, plan, kind);
      CHECK(same_bits(a, c));
    }
  }
}

TEST_CASE("prepacked equals packing inside") {
  const auto seq = generate_sequence(41, 9, 3);
  DenseMatrix a = DenseMatrix::random(45, 41, 4), b = a;
  const KernelShape shape{16, 2};
  const BlockPlan plan = make_plan(10, 4, 32);
  apply_blocked(a.view(), nullptr, false, seq, plan, shape, TransformKind::Rotation, 1);
  PackedPanels packed = pack_row_block(b.view(), 0, 45, 16);
  apply_blocked(b.view(), &packed, true, seq, plan, shape, TransformKind::Rotation, 1);
  DenseMatrix out(45, 41);
  unpack_row_block(packed, out.view(), 0);
  CHECK(same_bits(a, out));
}

TEST_CASE("thread count does not change the result") {
  const auto seq = generate_sequence(64, 10, 5);
  const DenseMatrix a = DenseMatrix::random(150, 64, 6);
  DenseMatrix ref = a;
  apply_blocked(ref.view(), seq, make_plan(16, 4, 32), {16, 2}, TransformKind::Rotation, 1);
  for (std::size_t t : {2u, 3u, 4u, 7u, 16u}) {
    DenseMatrix b = a;
    apply_blocked(b.view(), seq, make_plan(16, 4, 32), {16, 2}, TransformKind::Rotation, t);
    CHECK(same_bits(ref, b));
  }
}

TEST_CASE("blocked fast mode within tolerance") {
  const auto seq = generate_sequence(60, 12, 7);
  DenseMatrix a = DenseMatrix::random(40, 60, 8), b = a;
  apply_naive(a.view(), seq);
  KernelShape fast{16, 2};
  fast.mode = Arith::Fast;
  apply_blocked(b.view(), seq, make_plan(16, 4, 32), fast);
  for (std::size_t i = 0; i < 40; ++i) {
    const double norm = testutil::row_norm(a, i);
    for (std::size_t j = 0; j < 60; ++j)
      CHECK(std::abs(a(i, j) - b(i, j)) <= 16 * 12 * testutil::eps * norm);
  }
}

TEST_CASE("blocked argument checks") {
  const auto seq = generate_sequence(10, 3, 1);
  DenseMatrix a(8, 10);
  CHECK_THROWS_AS(apply_blocked(a.view(), seq, make_plan(8, 1, 16), {16, 2}), UsageError);
  CHECK_THROWS_AS(apply_blocked(a.view(), seq, make_plan(8, 2, 20), {16, 2}), UsageError);
  CHECK_THROWS_AS(apply_blocked(a.view(), seq, make_plan(1, 2, 16), {16, 2}), UsageError);
  DenseMatrix wrong(8, 9);
  CHECK_THROWS_AS(apply_blocked(wrong.view(), seq, make_plan(8, 2, 16), {16, 2}), UsageError);
}

TEST_CASE("sweep steps cover each transform once") {
  for (auto [m, n, k] : {std::tuple{20u, 17u, 9u}, {5u, 4u, 7u}, {33u, 40u, 3u}}) {
    const BlockPlan plan = make_plan(6, 4, 8);
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, int> seen;
    for_each_sweep_step(m, n, k, plan, [&](const SweepStep& st) {
      for_each_block(st.n_cols - 1, st.k, [&](std::size_t j, std::size_t p) {
        ++seen[{st.rows.begin, st.j0 + j, st.p0 + p}];
      });
    });
    const std::size_t row_blocks = (m + 7) / 8;
    CHECK(seen.size() == row_blocks * (n - 1) * k);
    bool once = true;
    for (auto& [key, count] : seen) once = once && count == 1;
    CHECK(once);
  }
}

TEST_CASE("kernel loop nest: coverage and block order") {
  // Instrumented kernel run at m=n=32, k=5
  for (auto variant : {Variant::Kernel, Variant::KernelPrepacked}) {
    const auto seq = generate_sequence(32, 5, 9);
    DenseMatrix a = DenseMatrix::random(32, 32, 10), b = a;
    InstrumentOptions opt;
    opt.plan = make_plan(6, 2, 16);
    opt.shape = {8, 2};
    const auto counters = instrumented_apply(variant, a.view(), seq, opt);
    CHECK(counters.transforms() == 31 * 5);
    CHECK(order_respects_dependencies(counters.order, 32, 5));

    // Blocks of one row block: chunk-major, phases in order, pipeline blocks ascending.
    std::map<std::size_t, std::vector<BlockEvent>> by_rb;
    for (const auto& e : counters.blocks) by_rb[e.row_block].push_back(e);
    CHECK(by_rb.size() == 2);
    for (auto& [rb, evs] : by_rb) {
      for (std::size_t t = 1; t < evs.size(); ++t) {
        const auto& prev = evs[t - 1];
        const auto& cur = evs[t];
        CHECK(prev.p_b <= cur.p_b);
        if (prev.p_b == cur.p_b) {
          CHECK(static_cast<int>(prev.phase) <= static_cast<int>(cur.phase));
          if (prev.phase == Phase::Pipeline && cur.phase == Phase::Pipeline)
            CHECK(prev.w0 + prev.n_waves == cur.w0);
        }
      }
    }
    apply_naive(b.view(), seq);
    CHECK(same_bits(a, b));
  }
}

TEST_CASE("config files") {
  std::istringstream in(
      "# reference machine\n"
      "T1 = 5000\n"
      "T2=40000   # inline comment\n"
      "T3=9000000\n"
      "\n"
      "m_b_cap=2400\n"
      "threads=4\n");
  const auto cfg = parse_config(in);
  CHECK(cfg.cache.T1 == 5000);
  CHECK(cfg.cache.T2 == 40000);
  CHECK(cfg.cache.T3 == 9000000);
  CHECK(cfg.cache.S == 32000);
  CHECK(cfg.m_b_cap == 2400);
  CHECK(cfg.threads == 4);

  std::istringstream bad_key("L9=3\n");
  CHECK_THROWS_AS(parse_config(bad_key), UsageError);
  std::istringstream bad_value("T1=lots\n");
  CHECK_THROWS_AS(parse_config(bad_value), UsageError);

  const auto path = std::filesystem::temp_directory_path() / "rotseq_unit_cfg.txt";
  {
    std::ofstream out(path);
    out << "S=10000\nline_bytes=128\n";
  }
  const auto loaded = load_config(path);
  CHECK(loaded.cache.S == 10000);
  CHECK(loaded.cache.line_bytes == 128);
  std::filesystem::remove(path);
  CHECK_THROWS(load_config(path));
}

}  // TEST_SUITE
