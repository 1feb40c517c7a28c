#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "rotseq/blocksched.hpp"
#include "rotseq/error.hpp"
#include "rotseq/rotcore.hpp"
#include "rotseq/verify.hpp"

using namespace rotseq;
using doctest::Approx;

TEST_SUITE("verify") {

TEST_CASE("accumulate_Q examples") {
  const auto q = accumulate_Q(RotationSequence(2, 1, {0.6}, {0.8}));
  CHECK(q(0, 0) == 0.6);
  CHECK(q(0, 1) == -0.8);
  CHECK(q(1, 0) == 0.8);
  CHECK(q(1, 1) == 0.6);

  const auto id = accumulate_Q(RotationSequence(5, 3));
  CHECK(testutil::same_bits(id, DenseMatrix::identity(5)));

  const auto qr = accumulate_Q(generate_sequence(16, 3, 2));
  CHECK(orthogonality_defect(qr) <= 1e-13);
  const auto qh = accumulate_Q(generate_sequence(16, 3, 2), TransformKind::Reflector);
  CHECK(orthogonality_defect(qh) <= 1e-13);
}

TEST_CASE("accumulate_Q has unit rows and columns") {
  const std::size_t k = 20;
  const auto q = accumulate_Q(generate_sequence(30, k, 4));
  const double tol = 100 * k * testutil::eps;
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(std::abs(testutil::row_norm(q, i) - 1) <= tol);
    double col = 0;
    for (std::size_t r = 0; r < 30; ++r) col += q(r, i) * q(r, i);
    CHECK(std::abs(std::sqrt(col) - 1) <= tol);
  }
}

TEST_CASE("accumulate_Q matches the explicit product") {
  for (auto kind : testutil::kKinds) {
    const auto seq = generate_sequence(6, 4, 8);
    const auto q = accumulate_Q(seq, kind);
    const auto want = testutil::brute_force(DenseMatrix::identity(6), seq, kind);
    CHECK(testutil::max_abs_diff(q, want) <= 1e-15);
  }
}

TEST_CASE("reference multiply") {
  const auto a = DenseMatrix::random(5, 4, 1);
  CHECK(testutil::same_bits(reference_multiply(a, DenseMatrix::identity(4)), a));

  DenseMatrix row(1, 2);
  row(0, 0) = 1, row(0, 1) = 2;
  const auto p = reference_multiply(row, accumulate_Q(RotationSequence(2, 1, {0.6}, {0.8})));
  CHECK(p(0, 0) == Approx(2.2).epsilon(1e-15));
  CHECK(p(0, 1) == Approx(0.4).epsilon(1e-15));

  const auto a8 = DenseMatrix::random(8, 8, 2);
  const auto q1 = accumulate_Q(generate_sequence(8, 3, 3));
  const auto q2 = accumulate_Q(generate_sequence(8, 2, 4));
  const auto left = reference_multiply(reference_multiply(a8, q1), q2);
  const auto right = reference_multiply(a8, reference_multiply(q1, q2));
  CHECK(testutil::max_abs_diff(left, right) <= 1e-12);

  CHECK_THROWS_AS(reference_multiply(DenseMatrix(3, 4), DenseMatrix(3, 3)), UsageError);
}

TEST_CASE("compare") {
  const auto x = DenseMatrix::random(6, 7, 5);
  const auto same = compare(x, x);
  CHECK(same.bitwise_equal);
  CHECK(same.max_abs_diff == 0);
  CHECK(same.frobenius_rel_diff == 0);
  CHECK(passes(same, TolProfile::Strict, 1));

  DenseMatrix y = x;
  y(3, 2) = std::nextafter(y(3, 2), 10.0);
  const auto r = compare(y, x);
  CHECK_FALSE(r.bitwise_equal);
  CHECK(r.max_abs_diff > 0);
  CHECK(r.max_rel_diff < 1e-15);
  CHECK_FALSE(passes(r, TolProfile::Strict, 1));
  CHECK(passes(r, TolProfile::Fast, 1));
  CHECK(fast_tolerance(3) == 48 * testutil::eps);

  DenseMatrix z = x;
  z(0, 0) += 1e-6;
  CHECK_FALSE(passes(compare(z, x), TolProfile::Fast, 10));

  CHECK_THROWS_AS(compare(DenseMatrix(2, 2), DenseMatrix(2, 3)), UsageError);
}

TEST_CASE("end-to-end oracle for the kernel path") {
  const auto seq = generate_sequence(48, 6, 6);
  const auto a = DenseMatrix::random(48, 48, 7);
  DenseMatrix b = a;
  BlockPlan plan;
  plan.n_b = 16, plan.k_b = 4, plan.m_b = 32;
  apply_blocked(b.view(), seq, plan, {16, 2});
  const auto want = reference_multiply(a, accumulate_Q(seq));
  CHECK(compare(b, want).frobenius_rel_diff <= 1e-12);
}

TEST_CASE("norm preservation") {
  for (auto kind : testutil::kKinds) {
    const std::size_t k = 32;
    const auto seq = generate_sequence(128, k, 9);
    const auto a = DenseMatrix::random(128, 128, 10);
    DenseMatrix b = a;
    apply_naive(b.view(), seq, kind);
    const double tol = 100 * k * testutil::eps;
    for (std::size_t i = 0; i < 128; ++i) {
      const double before = testutil::row_norm(a, i);
      CHECK(std::abs(testutil::row_norm(b, i) - before) <= tol * before);
    }
    CHECK(std::abs(testutil::frobenius(b) - testutil::frobenius(a)) <=
          tol * testutil::frobenius(a));
  }
}

}  // TEST_SUITE
