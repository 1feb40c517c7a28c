#pragma once

#include <cstddef>
#include <string_view>

namespace rotseq {

/// 2x2 action applied to each column pair.
///   Rotation:  G = [[c, s], [-s, c]]
///   Reflector: H = [[c, s], [ s, -c]]
enum class TransformKind { Rotation, Reflector };

/// Strict: one fixed scalar formula, no multiply-add contraction; every
/// algorithm variant is bit-identical. Fast: contraction allowed.
enum class Arith { Strict, Fast };

constexpr std::string_view to_string(TransformKind kind) {
  return kind == TransformKind::Rotation ? "rotation" : "reflector";
}

constexpr std::string_view to_string(Arith arith) {
  return arith == Arith::Strict ? "strict" : "fast";
}

/// Index of one transform: acts on matrix columns j, j+1 during sequence p.
struct RotIndex {
  std::size_t j = 0;
  std::size_t p = 0;
  friend bool operator==(const RotIndex&, const RotIndex&) = default;
};

}  // namespace rotseq
