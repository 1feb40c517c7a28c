#pragma once

// Correctness oracles independent of the code under test: an explicit
// orthogonal matrix for a sequence, a plain triple-loop multiply, and the one
// shared definition of "equal" for strict and fast arithmetic.

#include <cstddef>

#include "rotseq/matrix.hpp"
#include "rotseq/sequence.hpp"
#include "rotseq/types.hpp"

namespace rotseq {

struct ComparisonReport {
  double max_abs_diff = 0;
  double max_rel_diff = 0;       // elementwise, relative to the row 2-norm of Y
  double frobenius_rel_diff = 0;
  bool bitwise_equal = true;
};

enum class TolProfile { Strict, Fast };

/// Q = I_n with the sequence applied from the right, sequence by sequence.
DenseMatrix accumulate_Q(const RotationSequence& seq, TransformKind kind = TransformKind::Rotation);

/// A Q by the textbook triple loop.
DenseMatrix reference_multiply(const MatrixView& a, const MatrixView& q);
inline DenseMatrix reference_multiply(const DenseMatrix& a, const DenseMatrix& q) {
  return reference_multiply(a.view(), q.view());
}

ComparisonReport compare(const MatrixView& x, const MatrixView& y);
inline ComparisonReport compare(const DenseMatrix& x, const DenseMatrix& y) {
  return compare(x.view(), y.view());
}

/// Strict: bitwise. Fast: frobenius_rel_diff and max_rel_diff both <= 16 k eps.
bool passes(const ComparisonReport& r, TolProfile profile, std::size_t k);
double fast_tolerance(std::size_t k);

/// max |Q^T Q - I|.
double orthogonality_defect(const DenseMatrix& q);

}  // namespace rotseq
