#pragma once

#include "apent/hermitian.hpp"

namespace apent {

// Partial PSD matrix with blocks (1,2), (2,2), (2,3) etc. known and the
// (1,3) corner free. Block sizes may be zero; with an empty middle block
// this degenerates to the two-block problem.
struct PartialPsd3 {
  CMat q11, q12, q22, q23, q33;

  int d1() const { return static_cast<int>(q11.rows()); }
  int d2() const { return static_cast<int>(q22.rows()); }
  int d3() const { return static_cast<int>(q33.rows()); }
};

// Schur complements of the middle block in the two known corners, plus the
// central corner value q12 q22^+ q23.
struct ThreeBlockData {
  CMat schur1, schur3, central;
};

// Validates shapes, Hermitian diagonal blocks, and that both known 2x2
// corners are PSD within kPsdTol (rejected, not projected).
ThreeBlockData three_block_data(const PartialPsd3& p);

// Corner induced by a contraction C (rows = first block, cols = third):
// central + schur1^{1/2} C schur3^{1/2}. C = 0 is the central completion,
// the unique determinant maximizer.
CMat three_block_corner(const PartialPsd3& p, const CMat& C);

// The completed (d1+d2+d3)-square matrix.
CMat three_block_complete(const PartialPsd3& p, const CMat& C);

// Inverse map: the minimal-norm C with three_block_corner(p, C) = corner.
// Throws std::domain_error when no contraction produces the corner (it then
// lies outside the PSD completion set).
CMat three_block_extract(const PartialPsd3& p, const CMat& corner);

}  // namespace apent
