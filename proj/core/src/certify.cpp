#include "bmsync/certify.hpp"

#include "bmsync/oblique.hpp"
#include "bmsync/rng.hpp"
#include "bmsync/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace bmsync {
namespace {

constexpr std::array<std::pair<Verdict, std::string_view>, 4> kVerdictNames{{
    {Verdict::second_order_critical, "second-order-critical"},
    {Verdict::rank_deficient_global, "rank-deficient-global"},
    {Verdict::global_unique_ground_truth, "global-unique-ground-truth"},
    {Verdict::inconclusive, "inconclusive"},
}};

// Eigen-solves inside certify use seeds derived from the problem size only, so
// repeated calls on the same input agree bit for bit.
EigenOptions certify_eig_options(Index n, double tol, std::uint64_t salt) {
  EigenOptions options;
  options.tol = tol;
  options.max_iter = static_cast<int>(std::max<Index>(40 * n, 4000));
  options.seed = derive_seed(0xce27'1f1eULL, {static_cast<std::uint64_t>(n), salt});
  return options;
}

double threshold_for(Index n, double tol, double norm_a) {
  // Guard the zero operator: every residual is then exactly zero anyway.
  const double scale = static_cast<double>(n) * norm_a;
  return tol * std::max(scale, std::numeric_limits<double>::min() / tol);
}

Vector row_dots(const Matrix& aq, const Matrix& q) {
  return (aq.array() * q.array()).rowwise().sum().matrix();
}

// λ_min − residual: a certified lower bound on the smallest eigenvalue.
double min_eig_lower(const SymOp& op, double eig_tol, std::uint64_t salt, double* value = nullptr) {
  const EigResult e = extreme_eigenpair(op, Extreme::smallest,
                                        certify_eig_options(op.size(), eig_tol, salt));
  if (value != nullptr) *value = e.value;
  return e.value - e.residual;
}

}  // namespace

std::string_view to_string(Verdict verdict) {
  for (const auto& [v, name] : kVerdictNames) {
    if (v == verdict) return name;
  }
  return "inconclusive";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  for (const auto& [v, name] : kVerdictNames) {
    if (name == text) return v;
  }
  return std::nullopt;
}

double operator_norm(const SymOp& a, double rel_tol) {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("operator_norm: rel_tol must be > 0");
  const Index n = a.size();
  // ‖Av‖/‖v‖ after a few power steps is a lower bound on ‖A‖, so a residual
  // target relative to it is at least as strict as one relative to ‖A‖.
  Rng rng = make_rng(derive_seed(0x0be7'a70eULL, {static_cast<std::uint64_t>(n)}));
  Vector v = standard_normal(n, rng).normalized();
  double scale = 0.0;
  for (int it = 0; it < 8; ++it) {
    Vector av = a.apply(v);
    scale = std::max(scale, av.norm());
    if (av.norm() == 0.0) break;
    v = av.normalized();
  }
  if (scale == 0.0) {
    // Either A = 0 or v hit its kernel; the diagonal decides cheaply for sparse A.
    scale = a.diagonal().cwiseAbs().maxCoeff();
    if (scale == 0.0 && n <= kDenseEigenCutoff) scale = a.densify().norm();
    if (scale == 0.0) return 0.0;
  }
  EigenOptions options = certify_eig_options(n, rel_tol * scale, 1);
  const EigResult lo = extreme_eigenpair(a, Extreme::smallest, options);
  options.seed = certify_eig_options(n, rel_tol * scale, 2).seed;
  const EigResult hi = extreme_eigenpair(a, Extreme::largest, options);
  // |θ| + residual bounds the extreme eigenvalue magnitude from above.
  return std::max(std::abs(lo.value) + lo.residual, std::abs(hi.value) + hi.residual);
}

Residuals criticality_residuals(const SymOp& a, const CirclePoint& q, double eig_tol) {
  if (a.size() != q.size()) throw DimensionError("criticality_residuals: size mismatch");
  const Matrix rows = q.rows();
  const Matrix aq = a.apply(rows);
  const Vector d = row_dots(aq, rows);
  // (ddiag(AQQᵀ) − A)Q = diag(d)Q − AQ.
  const double grad = (d.asDiagonal() * rows - aq).norm();
  const SymOp h = SymOp::hadamard_form(a, d, rows);
  const EigResult e = extreme_eigenpair(h, Extreme::smallest,
                                        certify_eig_options(a.size(), eig_tol, 3));
  return Residuals{grad, e.value};
}

SymOp dual_matrix(const SymOp& a, const Matrix& q_rows) {
  if (a.size() != q_rows.rows()) throw DimensionError("dual_matrix: size mismatch");
  const Matrix aq = a.apply(q_rows);
  return SymOp::low_rank_update(a, -1.0, row_dots(aq, q_rows), {});
}

CertificateReport dual_certificate(const SymOp& a, const CirclePoint& q, double tol,
                                   const Vector* ground_truth) {
  return dual_certificate(a, q, tol, operator_norm(a), ground_truth);
}

CertificateReport dual_certificate(const SymOp& a, const CirclePoint& q, double tol,
                                   double norm_a, const Vector* ground_truth) {
  if (!(tol > 0.0)) throw std::invalid_argument("dual_certificate: tol must be > 0");
  if (a.size() != q.size()) throw DimensionError("dual_certificate: size mismatch");
  if (ground_truth != nullptr && ground_truth->size() != a.size()) {
    throw DimensionError("dual_certificate: ground truth size mismatch");
  }
  const Index n = a.size();
  CertificateReport report;
  report.norm_a = norm_a;
  report.threshold = threshold_for(n, tol, norm_a);
  const double eig_tol = 0.1 * report.threshold;

  const Residuals r = criticality_residuals(a, q, eig_tol);
  report.grad_residual = r.grad_residual;
  report.hess_min_eig = r.hess_min_eig;
  report.q_rank = numerical_rank(q.rows(), kRankThreshold);
  min_eig_lower(dual_matrix(a, q.rows()), eig_tol, 4, &report.s_min_eig);

  const bool second_order =
      r.grad_residual <= report.threshold && r.hess_min_eig >= -report.threshold;
  if (!second_order) {
    report.verdict = Verdict::inconclusive;
  } else if (report.q_rank == 1) {
    report.verdict = Verdict::rank_deficient_global;
    if (ground_truth != nullptr) {
      // Rank one means Q = x·uᵀ with x ∈ {±1}ⁿ; compare x with z up to sign.
      const Vector& z = *ground_truth;
      const double aligned = std::abs((q.rows().transpose() * z).norm());
      const bool matches = std::abs(aligned - static_cast<double>(n)) <= 1e-9 * static_cast<double>(n);
      if (matches && uniqueness_report(a, z, tol, norm_a).unique) {
        report.verdict = Verdict::global_unique_ground_truth;
      }
    }
  } else {
    report.verdict = Verdict::second_order_critical;
  }
  return report;
}

UniquenessReport uniqueness_report(const SymOp& a, const Vector& z, double tol, double norm_a) {
  if (!(tol > 0.0)) throw std::invalid_argument("uniqueness_check: tol must be > 0");
  const Index n = a.size();
  if (z.size() != n) throw DimensionError("uniqueness_check: size mismatch");
  if ((z.array().abs() != 1.0).any()) throw std::invalid_argument("uniqueness_check: z must be a sign vector");

  UniquenessReport report;
  report.threshold = threshold_for(n, tol, norm_a);
  const double eig_tol = 0.1 * report.threshold;
  const Vector az = a.apply(z);
  const Vector d = az.cwiseProduct(z);
  const SymOp s = SymOp::low_rank_update(a, -1.0, d, {});
  report.sz_norm = (d.cwiseProduct(z) - az).norm();

  min_eig_lower(s, eig_tol, 5, &report.s_min_eig);

  // On z⊥ the deflated operator P S P + β·zzᵀ/n agrees with S, and z itself is
  // pushed to β. ‖S‖ ≤ ‖Az‖∞ + ‖A‖ ≤ (√n + 1)‖A‖ < β keeps z out of the way.
  const double beta = (std::sqrt(static_cast<double>(n)) + 2.0) * norm_a + report.threshold;
  const double inv_n = 1.0 / static_cast<double>(n);
  const MatvecFn deflated = [&](const Vector& in, Vector& out) {
    Vector v = in - (z.dot(in) * inv_n) * z;
    Vector sv = d.cwiseProduct(v) - a.apply(v);
    out = sv - (z.dot(sv) * inv_n) * z + (beta * z.dot(in) * inv_n) * z;
  };
  EigResult second;
  if (n == 1) {
    second.value = std::numeric_limits<double>::infinity();
  } else {
    second = extreme_eigenpair(n, deflated, Extreme::smallest, certify_eig_options(n, eig_tol, 6));
  }
  report.s_second_eig = second.value;
  report.unique = report.sz_norm <= report.threshold && report.s_min_eig >= -report.threshold &&
                  second.value - second.residual > report.threshold;
  return report;
}

bool uniqueness_check(const SymOp& a, const Vector& z, double tol) {
  return uniqueness_report(a, z, tol, operator_norm(a)).unique;
}

double sdp_upper_bound(const SymOp& a, const Matrix& q_rows, double norm_a) {
  const Index n = a.size();
  const double cap = static_cast<double>(n) * norm_a;
  const Matrix aq = a.apply(q_rows);
  const double value = (aq.array() * q_rows.array()).sum();
  const double eig_tol = std::max(1e-10 * cap, std::numeric_limits<double>::min());
  // SDP ≥ Tr(QᵀAQ) for any feasible Q, so the bound never drops below the
  // point's own objective, even when rounding puts it a few ulps above the
  // Lanczos estimate of n‖A‖.
  const auto bound = [&](double lower_eig) {
    return std::max(value, std::min(cap, value + static_cast<double>(n) * std::max(0.0, -lower_eig)));
  };
  try {
    return bound(min_eig_lower(dual_matrix(a, q_rows), eig_tol, 7));
  } catch (const EigenNotConverged& e) {
    // The best Ritz pair still yields a valid bound once its residual is subtracted.
    const double lower_eig = e.best().value - e.best().residual;
    if (!std::isfinite(lower_eig)) return std::max(value, cap);
    return bound(lower_eig);
  }
}

SdpEstimate sdp_value_estimate(const SymOp& m, const SolverConfig& config) {
  config.validate();
  const Index n = m.size();
  SdpEstimate out;
  const double norm_m = operator_norm(m);
  out.norm_bound = static_cast<double>(n) * norm_m;
  // X = I is feasible, so Tr(M) is always a valid lower bound.
  out.lower = m.diagonal().sum();
  out.upper = out.norm_bound;
  const double threshold = threshold_for(n, kDefaultCertifyTol, norm_m);

  if (n == 1) {
    out.upper = out.lower;
    out.final_rank = 1;
    out.certified = true;
    return out;
  }

  const Index cap = std::min<Index>(
      n, static_cast<Index>(std::ceil(std::sqrt(2.0 * static_cast<double>(n)))) + 1);
  std::optional<ObliquePoint> init;
  try {
    for (Index p = 2; p <= std::max<Index>(cap, 2); ++p) {
      SolverConfig level = config;
      level.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(p)});
      const ObliqueSolveReport r = solve_rankp(m, p, level, init);
      out.final_rank = p;
      out.lower = std::max(out.lower, r.cost);
      out.upper = std::min(out.upper, sdp_upper_bound(m, r.point.rows(), norm_m));
      if (out.upper - out.lower <= threshold) break;
      const bool full_rank = numerical_rank(r.point.rows(), kRankThreshold) == p;
      if (!full_rank || p >= cap) break;
      Matrix lifted = Matrix::Zero(n, p + 1);
      lifted.leftCols(p) = r.point.rows();
      init = ObliquePoint(std::move(lifted));
    }
  } catch (const SolverError&) {
    out.upper = out.norm_bound;
  } catch (const EigenNotConverged&) {
    out.upper = out.norm_bound;
  }
  out.upper = std::max(out.upper, out.lower);
  out.certified = out.upper - out.lower <= threshold;
  return out;
}

}  // namespace bmsync
