#include "bmsync/oblique.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace bmsync {

ObliquePoint::ObliquePoint(Matrix rows) : rows_(std::move(rows)) {
  if (rows_.cols() < 2) throw std::invalid_argument("ObliquePoint: need p >= 2 columns");
  for (Index i = 0; i < rows_.rows(); ++i) {
    if (std::abs(rows_.row(i).norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("ObliquePoint: row " + std::to_string(i) + " is not unit norm");
    }
  }
}

ObliquePoint ObliquePoint::from_circle(const CirclePoint& q) { return ObliquePoint(Matrix(q.rows())); }

ObliquePoint random_oblique(Index n, Index p, Rng& rng) {
  if (n < 1 || p < 2) throw std::invalid_argument("random_oblique: need n >= 1 and p >= 2");
  Matrix rows(n, p);
  for (Index i = 0; i < n; ++i) {
    Vector g = standard_normal(p, rng);
    while (g.norm() == 0.0) g = standard_normal(p, rng);
    rows.row(i) = g.normalized().transpose();
  }
  return ObliquePoint(std::move(rows));
}

Matrix project_rows(const ObliquePoint& q, const Matrix& ambient) {
  const Vector inner = (ambient.array() * q.rows().array()).rowwise().sum().matrix();
  return ambient - inner.asDiagonal() * q.rows();
}

ObliquePoint retract_rows(const ObliquePoint& q, const Matrix& tangent, double t) {
  Matrix rows = q.rows() + t * tangent;
  for (Index i = 0; i < rows.rows(); ++i) rows.row(i) /= rows.row(i).norm();
  return ObliquePoint(std::move(rows));
}

double cost(const SymOp& a, const ObliquePoint& q) {
  if (a.size() != q.size()) throw DimensionError("cost: dimension mismatch");
  return (a.apply(q.rows()).array() * q.rows().array()).sum();
}

Matrix rgrad(const SymOp& a, const ObliquePoint& q) {
  if (a.size() != q.size()) throw DimensionError("rgrad: dimension mismatch");
  return project_rows(q, 2.0 * a.apply(q.rows()));
}

int numerical_rank(const Matrix& rows, double threshold) {
  if (rows.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(rows);
  const Vector& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  int rank = 0;
  for (Index k = 0; k < s.size(); ++k) {
    if (s(k) / s(0) >= threshold) ++rank;
  }
  return rank;
}

}  // namespace bmsync
