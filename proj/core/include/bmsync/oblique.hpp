#pragma once

#include "bmsync/circle.hpp"
#include "bmsync/rng.hpp"
#include "bmsync/symop.hpp"

namespace bmsync {

/// Point of the rank-p oblique manifold: n×p, unit rows, p ≥ 2.
class ObliquePoint {
 public:
  explicit ObliquePoint(Matrix rows);
  static ObliquePoint from_circle(const CirclePoint& q);

  Index size() const { return rows_.rows(); }
  Index rank_bound() const { return rows_.cols(); }
  const Matrix& rows() const { return rows_; }

 private:
  Matrix rows_;
};

ObliquePoint random_oblique(Index n, Index p, Rng& rng);

/// Row-wise projection onto the tangent space at q: Uᵢ − ⟨Uᵢ, Qᵢ⟩Qᵢ.
Matrix project_rows(const ObliquePoint& q, const Matrix& ambient);

/// Row normalization of Q + t·U.
ObliquePoint retract_rows(const ObliquePoint& q, const Matrix& tangent, double t);

double cost(const SymOp& a, const ObliquePoint& q);

/// Riemannian gradient of Tr(QᵀAQ): the projection of 2AQ.
Matrix rgrad(const SymOp& a, const ObliquePoint& q);

/// Numerical rank: number of singular values with σₖ/σ₁ ≥ threshold.
int numerical_rank(const Matrix& rows, double threshold = 1e-8);

}  // namespace bmsync
