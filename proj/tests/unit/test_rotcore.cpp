#include <set>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "rotseq/blocksched.hpp"
#include "rotseq/error.hpp"
#include "rotseq/rotcore.hpp"

using namespace rotseq;
using testutil::same_bits;

TEST_SUITE("rotcore") {

TEST_CASE("rot examples") {
  std::vector<double> x{1.5, -2.0}, y{0.25, 7.0};
  rot(x, y, 1.0, 0.0);
  CHECK(x == std::vector<double>{1.5, -2.0});
  CHECK(y == std::vector<double>{0.25, 7.0});

  std::vector<double> a{1}, b{2};
  rot(a, b, 0.0, 1.0);
  CHECK(a[0] == 2.0);
  CHECK(b[0] == -1.0);

  a = {1}, b = {2};
  rot(a, b, 0.6, 0.8);
  // 0.6*1 + 0.8*2 and -0.8*1 + 0.6*2 in double
  CHECK(a[0] == 0.6 * 1.0 + 0.8 * 2.0);
  CHECK(b[0] == -0.8 * 1.0 + 0.6 * 2.0);
  CHECK(a[0] == doctest::Approx(2.2).epsilon(1e-15));
  CHECK(b[0] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("rot rejects bad views") {
  std::vector<double> x(3), y(2), z(6);
  CHECK_THROWS_AS(rot(x, y, 1, 0), UsageError);
  std::span<double> all(z);
  CHECK_THROWS_AS(rot(all.subspan(0, 4), all.subspan(2, 4), 1, 0), UsageError);
  CHECK_NOTHROW(rot(all.subspan(0, 3), all.subspan(3, 3), 1, 0));
}

TEST_CASE("reflector examples") {
  std::vector<double> x{3}, y{4};
  apply_reflector_pair(x, y, 1.0, 0.0);
  CHECK(x[0] == 3.0);
  CHECK(y[0] == -4.0);

  x = {3}, y = {4};
  apply_reflector_pair(x, y, 0.0, 1.0);
  CHECK(x[0] == 4.0);
  CHECK(y[0] == 3.0);

  x = {1}, y = {2};
  apply_reflector_pair(x, y, 0.6, 0.8);
  CHECK(x[0] == doctest::Approx(2.2).epsilon(1e-15));
  CHECK(y[0] == doctest::Approx(-0.4).epsilon(1e-14));
}

TEST_CASE("reflector scheme agrees with direct evaluation") {
  const auto seq = generate_sequence(2, 500, 3);
  const auto a = DenseMatrix::random(1, 1000, 5);
  for (std::size_t t = 0; t < 500; ++t) {
    const double c = seq.c(0, t), s = seq.s(0, t);
    const double x0 = a(0, 2 * t), y0 = a(0, 2 * t + 1);
    std::vector<double> x{x0}, y{y0};
    apply_reflector_pair(x, y, c, s);
    const long double dx = static_cast<long double>(c) * x0 + static_cast<long double>(s) * y0;
    const long double dy = static_cast<long double>(s) * x0 - static_cast<long double>(c) * y0;
    const double scale = std::hypot(x0, y0);
    CHECK(std::abs(x[0] - static_cast<double>(dx)) <= 4 * testutil::eps * scale);
    CHECK(std::abs(y[0] - static_cast<double>(dy)) <= 4 * testutil::eps * scale);
  }
}

TEST_CASE("naive examples") {
  DenseMatrix a = DenseMatrix::random(5, 6, 1);
  const DenseMatrix before = a;
  apply_naive(a.view(), RotationSequence(6, 3));
  CHECK(same_bits(a, before));

  DenseMatrix one(1, 2);
  one(0, 0) = 1, one(0, 1) = 2;
  apply_naive(one.view(), RotationSequence(2, 1, {0.6}, {0.8}));
  CHECK(one(0, 0) == doctest::Approx(2.2).epsilon(1e-15));
  CHECK(one(0, 1) == doctest::Approx(0.4).epsilon(1e-15));

  for (auto kind : testutil::kKinds) {
    const auto seq = generate_sequence(3, 2, 99);
    DenseMatrix b = DenseMatrix::random(2, 3, 4);
    const DenseMatrix want = testutil::brute_force(b, seq, kind);
    apply_naive(b.view(), seq, kind);
    CHECK(testutil::max_abs_diff(b, want) <= 1e-15);
  }
}

TEST_CASE("naive against brute force on larger inputs") {
  for (auto kind : testutil::kKinds) {
    const auto seq = generate_sequence(9, 5, 17);
    DenseMatrix b = DenseMatrix::random(7, 9, 18);
    const DenseMatrix want = testutil::brute_force(b, seq, kind);
    apply_naive(b.view(), seq, kind);
    CHECK(testutil::max_abs_diff(b, want) <= 1e-13);
  }
}

TEST_CASE("naive shape checks and degenerate inputs") {
  DenseMatrix a(3, 4);
  CHECK_THROWS_AS(apply_naive(a.view(), RotationSequence(5, 1)), UsageError);
  DenseMatrix empty(0, 4);
  CHECK_NOTHROW(apply_naive(empty.view(), generate_sequence(4, 2, 1)));
  DenseMatrix pair = DenseMatrix::random(3, 2, 2);
  const auto seq = generate_sequence(2, 4, 3);
  const DenseMatrix want = testutil::brute_force(pair, seq, TransformKind::Rotation);
  apply_naive(pair.view(), seq);
  CHECK(testutil::max_abs_diff(pair, want) <= 1e-15);
}

TEST_CASE("wavefront order for n=4, k=2") {
  const auto waves = wavefront_waves(4, 2);
  const std::vector<std::vector<RotIndex>> want{
      {{0, 0}}, {{1, 0}, {0, 1}}, {{2, 0}, {1, 1}}, {{2, 1}}};
  CHECK(waves == want);
}

TEST_CASE("wavefront wave lengths") {
  for (std::size_t n : {2u, 3u, 7u, 20u}) {
    for (std::size_t k = 1; k <= n - 1; ++k) {
      const auto waves = wavefront_waves(n, k);
      std::vector<std::size_t> lens;
      std::size_t total = 0;
      for (const auto& w : waves) lens.push_back(w.size()), total += w.size();
      CHECK(total == (n - 1) * k);
      std::vector<std::size_t> want;
      for (std::size_t l = 1; l < k; ++l) want.push_back(l);
      for (std::size_t t = 0; t + k <= n - 1; ++t) want.push_back(k);
      for (std::size_t l = k - 1; l >= 1; --l) want.push_back(l);
      CHECK(lens == want);
    }
  }
}

TEST_CASE("wavefront equals naive bitwise") {
  for (auto kind : testutil::kKinds) {
    const auto seq = generate_sequence(400, 180, 5);
    DenseMatrix a = DenseMatrix::random(400, 400, 6);
    DenseMatrix b = a;
    apply_naive(a.view(), seq, kind);
    apply_wavefront(b.view(), seq, kind);
    CHECK(same_bits(a, b));
  }
  const auto seq = generate_sequence(10, 1, 8);
  DenseMatrix a = DenseMatrix::random(3, 10, 9), b = a;
  apply_naive(a.view(), seq);
  apply_wavefront(b.view(), seq);
  CHECK(same_bits(a, b));
}

TEST_CASE("wavefront rejects k > n-1") {
  DenseMatrix a(4, 4);
  CHECK_THROWS_AS(apply_wavefront(a.view(), generate_sequence(4, 4, 1)), UsageError);
}

TEST_CASE("block enumeration for n=3, k=2") {
  std::vector<RotIndex> got;
  for_each_block(3, 2, [&](std::size_t j, std::size_t p) { got.push_back({j, p}); });
  const std::vector<RotIndex> want{{1, 0}, {2, 0}, {0, 1}, {1, 1}};
  CHECK(got == want);
  for (std::size_t n = 1; n < 12; ++n)
    for (std::size_t k = 1; k <= n; ++k) {
      std::size_t count = 0;
      for_each_block(n, k, [&](std::size_t, std::size_t) { ++count; });
      CHECK(count == k * (n - k + 1));
    }
}

TEST_CASE("apply_block replays its enumeration") {
  const std::size_t n = 7, k = 3;
  const auto seq = generate_sequence(n + 1, k, 21);
  DenseMatrix a = DenseMatrix::random(5, n + 1, 22), b = a;
  apply_block(a.view(), seq.view());
  for_each_block(n, k, [&](std::size_t j, std::size_t p) {
    rot(std::span(b.data() + j * 5, 5), std::span(b.data() + (j + 1) * 5, 5), seq.c(j, p),
        seq.s(j, p));
  });
  CHECK(same_bits(a, b));

  // k = 1: one sequence over all columns
  const auto one = generate_sequence(n + 1, 1, 23);
  DenseMatrix c = DenseMatrix::random(4, n + 1, 24), d = c;
  apply_block(c.view(), one.view());
  apply_naive(d.view(), one);
  CHECK(same_bits(c, d));
}

TEST_CASE("apply_block shape errors") {
  const auto seq = generate_sequence(4, 3, 1);
  DenseMatrix a(2, 3);
  CHECK_THROWS_AS(apply_block(a.view(), seq.view()), UsageError);  // k = 3 > n = 2
}

TEST_CASE("block decomposition reproduces naive") {
  // m = n = 32, k = 4 with k_b = 2, n_b = 8
  const auto seq = generate_sequence(32, 4, 31);
  DenseMatrix a = DenseMatrix::random(32, 32, 32), b = a;
  apply_naive(a.view(), seq);
  BlockPlan plan;
  plan.n_b = 8, plan.k_b = 2, plan.m_b = 32;
  apply_block_sweep(b.view(), seq, plan);
  CHECK(same_bits(a, b));
}

TEST_CASE("fused group members") {
  const auto members = fused_group_members({1, 0, 2}, 4, 2);
  const std::vector<RotIndex> want{{1, 0}, {2, 0}, {0, 1}, {1, 1}};
  CHECK(members == want);
  std::set<std::size_t> cols;
  for (auto r : members) cols.insert(r.j), cols.insert(r.j + 1);
  CHECK(cols == std::set<std::size_t>{0, 1, 2, 3});
  // each member's prerequisites precede it within the group or lie outside it
  for (std::size_t t = 0; t < members.size(); ++t) {
    for (std::size_t u = t + 1; u < members.size(); ++u) {
      const auto a = members[t], b = members[u];
      CHECK_FALSE((a.p == b.p && a.j == b.j + 1));
      CHECK_FALSE((a.p == b.p + 1 && a.j + 1 == b.j));
    }
  }
}

TEST_CASE("fused 1x1 traverses like the wavefront") {
  std::vector<RotIndex> f, w;
  for_each_fused_group(9, 5, 1, 1, [&](const FusedGroup& g) {
    for (auto r : fused_group_members(g, 9, 1)) f.push_back(r);
  });
  for_each_wavefront(9, 5, [&](std::size_t j, std::size_t p) { w.push_back({j, p}); });
  CHECK(f == w);
}

TEST_CASE("fused equals naive bitwise") {
  for (auto kind : testutil::kKinds) {
    for (auto [nr, kr] : {std::pair{2, 2}, {1, 1}, {3, 2}, {2, 3}, {4, 1}}) {
      const auto seq = generate_sequence(64, 8, 41);
      DenseMatrix a = DenseMatrix::random(64, 64, 42), b = a;
      apply_naive(a.view(), seq, kind);
      apply_fused(b.view(), seq, nr, kr, kind);
      CHECK(same_bits(a, b));
    }
  }
  DenseMatrix a(2, 4);
  CHECK_THROWS_AS(apply_fused(a.view(), generate_sequence(4, 1, 1), 0, 2), UsageError);
}

TEST_CASE("fused groups cover every transform once in a legal order") {
  for (std::size_t n : {2u, 3u, 5u, 17u}) {
    for (std::size_t k : {1u, 2u, 5u, 9u}) {
      for (auto [nr, kr] : {std::pair{2u, 2u}, {3u, 2u}, {1u, 4u}, {5u, 3u}}) {
        std::vector<RotIndex> order;
        for_each_fused_group(n, k, nr, kr, [&](const FusedGroup& g) {
          for (auto r : fused_group_members(g, n, nr)) order.push_back(r);
        });
        std::vector<std::size_t> pos((n - 1) * k, order.size());
        bool once = order.size() == (n - 1) * k;
        for (std::size_t t = 0; t < order.size(); ++t) {
          auto& slot = pos[order[t].j + order[t].p * (n - 1)];
          once = once && slot == order.size();
          slot = t;
        }
        CHECK(once);
        bool legal = true;
        for (std::size_t p = 0; p < k; ++p)
          for (std::size_t j = 0; j + 1 < n; ++j) {
            const auto here = pos[j + p * (n - 1)];
            if (j > 0) legal = legal && pos[j - 1 + p * (n - 1)] < here;
            if (p > 0 && j + 2 < n) legal = legal && pos[j + 1 + (p - 1) * (n - 1)] < here;
          }
        CHECK(legal);
      }
    }
  }
}

TEST_CASE("generate_sequence") {
  const auto a = generate_sequence(50, 7, 123);
  const auto b = generate_sequence(50, 7, 123);
  CHECK(a.cosines() == b.cosines());
  CHECK(a.sines() == b.sines());
  CHECK(a.orthonormality_defect() <= 1e-15);
  CHECK(generate_sequence(50, 7, 124).cosines() != a.cosines());
  CHECK_THROWS_AS(generate_sequence(1, 3, 0), UsageError);
}

TEST_CASE("user sequences") {
  CHECK_THROWS_AS(RotationSequence(3, 1, {1.0, 0.5}, {0.0, 0.5}), UsageError);
  CHECK_NOTHROW(RotationSequence(3, 1, {1.0, 0.5}, {0.0, 0.5}, false));
  CHECK_THROWS_AS(RotationSequence(3, 1, {1.0}, {0.0}), UsageError);
}

}  // TEST_SUITE
