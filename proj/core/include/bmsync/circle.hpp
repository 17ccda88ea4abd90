#pragma once

#include "bmsync/rng.hpp"
#include "bmsync/symop.hpp"

#include <filesystem>
#include <iosfwd>

namespace bmsync {

using RowMatrix2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Feasible point of the rank-2 program: n rows, each a unit vector in ℝ².
class CirclePoint {
 public:
  /// Rows must already have unit norm within 1e-12.
  explicit CirclePoint(RowMatrix2 rows);

  /// Normalizes every row; throws if a row norm is off by more than
  /// `max_deviation` (the loader contract) or is zero.
  static CirclePoint normalized(RowMatrix2 rows, double max_deviation);

  /// Q = [labels 0].
  static CirclePoint from_signs(const Vector& labels);

  Index size() const { return rows_.rows(); }
  const RowMatrix2& rows() const { return rows_; }
  auto x() const { return rows_.col(0); }
  auto y() const { return rows_.col(1); }

 private:
  RowMatrix2 rows_;
};

/// Scalar per row: αᵢ multiplies the quarter-turned row JQᵢ, J = [[0,−1],[1,0]].
using TangentCoeffs = Vector;

/// Rows of JQ.
RowMatrix2 rotate_quarter(const RowMatrix2& rows);

/// Each row independently uniform on the unit circle.
CirclePoint random_point(Index n, Rng& rng);

/// Rotates row i by the angle t·αᵢ, then renormalizes it.
CirclePoint retract(const CirclePoint& q, const TangentCoeffs& alpha, double t);

/// Tr(QᵀAQ).
double cost(const SymOp& a, const CirclePoint& q);

/// Riemannian gradient in tangent coefficients: αᵢ = 2⟨(AQ)ᵢ, JQᵢ⟩.
/// The factor 2 matches d/dt Tr(QᵀAQ) along retract(Q, α, t).
TangentCoeffs rgrad(const SymOp& a, const CirclePoint& q);
/// Same, reusing a precomputed AQ.
TangentCoeffs rgrad_from_image(const RowMatrix2& aq, const CirclePoint& q);

/// H(Q) = ddiag(AQQᵀ) − A∘(QQᵀ) as a matrix-free operator.
///
/// The second derivative of t ↦ Tr(QᵀAQ) along retract(Q, α, t) at t = 0 is
/// −2αᵀH(Q)α, so H(Q) ⪰ 0 is the second-order condition for the maximization.
SymOp hess_matrix(const SymOp& a, const CirclePoint& q);
SymOp hess_matrix_from_image(const SymOp& a, const RowMatrix2& aq, const CirclePoint& q);

/// Text rows `Q_i1 Q_i2`, 17 significant digits.
void write_point(std::ostream& out, const CirclePoint& q);
void write_point(const std::filesystem::path& path, const CirclePoint& q);
/// Renormalizes rows; rejects rows whose norm is off by more than 1e-6.
CirclePoint read_point(std::istream& in);
CirclePoint read_point(const std::filesystem::path& path);

}  // namespace bmsync
