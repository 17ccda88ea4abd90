#include "bmsync/recover.hpp"

#include "bmsync/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bmsync {
namespace {

void require_same_size(const CirclePoint& q, const Vector& z, const char* what) {
  if (q.size() != z.size()) throw DimensionError(std::string(what) + ": size mismatch");
}

Vector signs_of(const Vector& v) {
  return v.unaryExpr([](double x) { return x < 0.0 ? -1.0 : 1.0; });
}

}  // namespace

double correlation(const CirclePoint& q, const Vector& z) {
  require_same_size(q, z, "correlation");
  return (q.rows().transpose() * z).norm() / static_cast<double>(z.size());
}

double overlap(const Vector& x, const Vector& z) {
  if (x.size() != z.size()) throw DimensionError("overlap: size mismatch");
  return std::abs(x.dot(z)) / static_cast<double>(z.size());
}

Vector round_gaussian(const CirclePoint& q, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double g1 = normal(rng);
  const double g2 = normal(rng);
  return signs_of(g1 * q.x() + g2 * q.y());
}

double frobenius_gap(const CirclePoint& q, const Vector& z) {
  require_same_size(q, z, "frobenius_gap");
  const Index n = q.size();
  if (n == 0) return 0.0;
  // With wᵢ = zᵢQᵢ, entry (i,j) of QQᵀ − zzᵀ is ±(⟨wᵢ,wⱼ⟩ − 1) = ∓½‖wᵢ − wⱼ‖².
  // Centring at a unit m keeps every term of order ‖wᵢ − m‖, so nothing of
  // size n² is subtracted when the gap is small.
  const RowMatrix2 w = z.asDiagonal() * q.rows();
  Eigen::RowVector2d m = w.colwise().sum();
  m = m.norm() > 0.0 ? m.normalized() : Eigen::RowVector2d(w.row(0));
  const RowMatrix2 e = w.rowwise() - m;
  const Vector a = -0.5 * e.rowwise().squaredNorm();
  const Eigen::RowVector2d e_sum = e.colwise().sum();
  const Eigen::Matrix2d scatter = e.transpose() * e;
  const double nd = static_cast<double>(n);
  const double gap_sq = 2.0 * nd * a.squaredNorm() + 2.0 * a.sum() * a.sum() +
                        4.0 * a.dot(e * e_sum.transpose()) + scatter.squaredNorm();
  return std::sqrt(std::max(gap_sq, 0.0));
}

bool exact_recovery(const CirclePoint& q, const Vector& z, std::optional<double> tol) {
  const double threshold = tol.value_or(kExactRecoveryRelTol * static_cast<double>(z.size()));
  if (!(threshold > 0.0)) throw std::invalid_argument("exact_recovery: tol must be > 0");
  return frobenius_gap(q, z) <= threshold;
}

RecoveryMetrics recovery_metrics(const CirclePoint& q, const Vector& z, Rng& rng,
                                 std::optional<double> tol) {
  RecoveryMetrics m;
  m.correlation = correlation(q, z);
  m.overlap = overlap(round_gaussian(q, rng), z);
  m.frobenius_gap = frobenius_gap(q, z);
  m.exact = m.frobenius_gap <= tol.value_or(kExactRecoveryRelTol * static_cast<double>(z.size()));
  return m;
}

Vector spectral_baseline(const SymOp& y) {
  const Index n = y.size();
  const SymOp off_diagonal = SymOp::low_rank_update(y, 1.0, -y.diagonal(), {});
  // A few power steps give a lower bound on ‖Y‖ that scales the residual target.
  Rng rng = make_rng(0xba5e'11e5ULL ^ static_cast<std::uint64_t>(n));
  Vector v = standard_normal(n, rng).normalized();
  double scale = 0.0;
  for (int it = 0; it < 4; ++it) {
    const Vector av = off_diagonal.apply(v);
    scale = std::max(scale, av.norm());
    if (av.norm() == 0.0) break;
    v = av.normalized();
  }
  if (scale == 0.0) return Vector::Ones(n);
  EigenOptions options;
  options.tol = 1e-6 * scale;
  options.max_iter = static_cast<int>(std::max<Index>(20 * n, 2000));
  try {
    return signs_of(extreme_eigenpair(off_diagonal, Extreme::largest, options).vector);
  } catch (const EigenNotConverged& e) {
    // Only the signs are used; the best Ritz vector is a fine estimator.
    return signs_of(e.best().vector);
  }
}

}  // namespace bmsync
