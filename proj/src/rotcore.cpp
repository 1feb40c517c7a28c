#include "rotseq/rotcore.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>

#include "kernels/kernel_set.hpp"
#include "rotseq/error.hpp"

namespace rotseq {

namespace {

void check_pair(std::span<double> x, std::span<double> y) {
  if (x.size() != y.size()) {
    throw UsageError("vector length mismatch: " + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()));
  }
  if (x.empty()) return;
  const std::less<const double*> lt;
  const bool disjoint =
      !lt(x.data(), y.data() + y.size()) || !lt(y.data(), x.data() + x.size());
  if (!disjoint) throw UsageError("x and y must not alias");
}

void check_shapes(const MatrixView& a, const RotationSequence& seq) {
  if (seq.n() != a.cols) {
    throw UsageError("sequence acts on " + std::to_string(seq.n()) +
                     " columns but the matrix has " + std::to_string(a.cols));
  }
}

}  // namespace

void rot(std::span<double> x, std::span<double> y, double c, double s, Arith arith) {
  check_pair(x, y);
  kernels::kernel_set(arith, TransformKind::Rotation).pair(x.data(), y.data(), x.size(), c, s);
}

void apply_reflector_pair(std::span<double> x, std::span<double> y, double c, double s,
                          Arith arith) {
  check_pair(x, y);
  kernels::kernel_set(arith, TransformKind::Reflector).pair(x.data(), y.data(), x.size(), c, s);
}

void apply_naive(MatrixView a, const RotationSequence& seq, TransformKind kind, Arith arith) {
  check_shapes(a, seq);
  if (a.rows == 0) return;
  const auto pair = kernels::kernel_set(arith, kind).pair;
  for_each_naive(seq.n(), seq.k(), [&](std::size_t j, std::size_t p) {
    pair(a.col(j), a.col(j + 1), a.rows, seq.c(j, p), seq.s(j, p));
  });
}

void apply_wavefront(MatrixView a, const RotationSequence& seq, TransformKind kind,
                     Arith arith) {
  check_shapes(a, seq);
  if (seq.k() > seq.n() - 1) {
    throw UsageError("wavefront needs k <= n-1 (k = " + std::to_string(seq.k()) +
                     ", n = " + std::to_string(seq.n()) +
                     "); use the blocked driver, which chunks k");
  }
  if (a.rows == 0) return;
  const auto pair = kernels::kernel_set(arith, kind).pair;
  for_each_wavefront(seq.n(), seq.k(), [&](std::size_t j, std::size_t p) {
    pair(a.col(j), a.col(j + 1), a.rows, seq.c(j, p), seq.s(j, p));
  });
}

void apply_block(MatrixView a_block, CoeffView coeffs, TransformKind kind, Arith arith) {
  if (a_block.cols < 2) throw UsageError("a block needs at least two columns");
  const std::size_t n = a_block.cols - 1;
  const std::size_t k = coeffs.cols;
  if (k > n) {
    throw UsageError("block with k = " + std::to_string(k) + " needs more than " +
                     std::to_string(n + 1) + " columns");
  }
  if (coeffs.rows < n) {
    throw UsageError("block coefficients need " + std::to_string(n) + " rows, got " +
                     std::to_string(coeffs.rows));
  }
  if (a_block.rows == 0) return;
  const auto pair = kernels::kernel_set(arith, kind).pair;
  for_each_block(n, k, [&](std::size_t j, std::size_t p) {
    pair(a_block.col(j), a_block.col(j + 1), a_block.rows, coeffs.cos(j, p), coeffs.sin(j, p));
  });
}

std::vector<RotIndex> fused_group_members(const FusedGroup& group, std::size_t n,
                                          std::size_t n_r) {
  std::vector<RotIndex> out;
  for (std::size_t b = 0; b < group.lanes; ++b) {
    for (std::size_t r = 0; r < n_r; ++r) {
      if (group.anchor + r < b) continue;
      const std::size_t j = group.anchor + r - b;
      if (j + 2 > n) continue;
      out.push_back({j, group.p0 + b});
    }
  }
  return out;
}

void apply_fused(MatrixView a, const RotationSequence& seq, std::size_t n_r, std::size_t k_r,
                 TransformKind kind, Arith arith) {
  check_shapes(a, seq);
  if (n_r < 1 || k_r < 1) throw UsageError("fused group sizes must be >= 1");
  if (n_r + k_r > 64) throw UsageError("fused group spans more than 64 columns");
  if (a.rows == 0) return;

  const auto& ks = kernels::kernel_set(arith, kind);
  const std::size_t n = seq.n();
  const std::size_t full_members = n_r * k_r;
  std::vector<double> cbuf(full_members), sbuf(full_members);
  std::vector<std::uint8_t> first(full_members);
  std::vector<double*> cols(n_r + k_r);

  for_each_fused_group(n, seq.k(), n_r, k_r, [&](const FusedGroup& g) {
    const auto members = fused_group_members(g, n, n_r);
    if (members.size() != full_members || members.size() == 1) {
      // Ragged edge (or a trivial 1x1 group): one transform at a time.
      for (const auto& r : members) {
        ks.pair(a.col(r.j), a.col(r.j + 1), a.rows, seq.c(r.j, r.p), seq.s(r.j, r.p));
      }
      return;
    }
    const std::size_t col0 = g.anchor + 1 - k_r;
    if (n_r == 2 && k_r == 2) {
      std::array<double, 8> cs{};
      for (std::size_t t = 0; t < 4; ++t) {
        cs[2 * t] = seq.c(members[t].j, members[t].p);
        cs[2 * t + 1] = seq.s(members[t].j, members[t].p);
      }
      ks.fused2x2(a.col(col0), a.col(col0 + 1), a.col(col0 + 2), a.col(col0 + 3), a.rows,
                  cs.data());
      return;
    }
    for (std::size_t t = 0; t < members.size(); ++t) {
      cbuf[t] = seq.c(members[t].j, members[t].p);
      sbuf[t] = seq.s(members[t].j, members[t].p);
      first[t] = static_cast<std::uint8_t>(members[t].j - col0);
    }
    for (std::size_t u = 0; u < n_r + k_r; ++u) cols[u] = a.col(col0 + u);
    ks.fused(cols.data(), n_r + k_r, a.rows, first.data(), cbuf.data(), sbuf.data(),
             members.size());
  });
}

std::vector<std::vector<RotIndex>> wavefront_waves(std::size_t n, std::size_t k) {
  std::vector<std::vector<RotIndex>> waves;
  for_each_wavefront(n, k, [&](std::size_t j, std::size_t p) {
    if (waves.empty() || j + p != waves.back().front().j + waves.back().front().p) {
      waves.emplace_back();
    }
    waves.back().push_back({j, p});
  });
  return waves;
}

}  // namespace rotseq
