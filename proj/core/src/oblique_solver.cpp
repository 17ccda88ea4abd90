#include "bmsync/rng.hpp"
#include "bmsync/solver.hpp"
#include "bmsync/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bmsync {
namespace {

constexpr double kAcceptRatioOblique = 0.1;

struct Frame {
  ObliquePoint q;
  Matrix aq;
  Vector d;  // dᵢ = ⟨(AQ)ᵢ, Qᵢ⟩
  double f;
};

// ½·(−Hess f)[U] = Proj(diag(d)U − AU) for tangent U.
Matrix half_neg_hessian(const SymOp& a, const Frame& frame, const Matrix& u) {
  return project_rows(frame.q, frame.d.asDiagonal() * u - a.apply(u));
}

struct TcgResult {
  Matrix eta;
  double model_increase = 0.0;
  bool boundary = false;
  int applies = 0;
};

TcgResult truncated_cg(const SymOp& a, const Frame& frame, const Matrix& g, double radius,
                       int max_iter) {
  TcgResult out;
  out.eta = Matrix::Zero(g.rows(), g.cols());
  Matrix h_eta = out.eta;
  Matrix r = -g;
  Matrix delta = g;
  double rr = r.squaredNorm();
  const double r0 = std::sqrt(rr);
  const double stop = r0 * std::min(r0, 0.1);
  for (int j = 0; j < max_iter && rr > 0.0; ++j) {
    const Matrix h_delta = half_neg_hessian(a, frame, delta);
    ++out.applies;
    const double kappa = 2.0 * (delta.array() * h_delta.array()).sum();
    const double alpha = rr / kappa;
    const Matrix trial = out.eta + alpha * delta;
    if (kappa <= 0.0 || trial.squaredNorm() >= radius * radius) {
      const double dd = delta.squaredNorm();
      const double ed = (out.eta.array() * delta.array()).sum();
      const double ee = out.eta.squaredNorm();
      const double tau = (-ed + std::sqrt(ed * ed + dd * (radius * radius - ee))) / dd;
      out.eta += tau * delta;
      h_eta += tau * h_delta;
      out.boundary = true;
      break;
    }
    out.eta = trial;
    h_eta += alpha * h_delta;
    r += (2.0 * alpha) * h_delta;
    const double rr_next = r.squaredNorm();
    if (std::sqrt(rr_next) <= stop) break;
    delta = -r + (rr_next / rr) * delta;
    rr = rr_next;
  }
  out.model_increase = (g.array() * out.eta.array()).sum() - (out.eta.array() * h_eta.array()).sum();
  return out;
}

}  // namespace

ObliqueSolveReport solve_rankp(const SymOp& a, Index p, const SolverConfig& config,
                               const std::optional<ObliquePoint>& init) {
  config.validate();
  const Index n = a.size();
  if (p < 2 || p > std::max<Index>(n, 2)) {
    throw std::invalid_argument("solve_rankp: need 2 <= p <= n");
  }
  if (init && (init->size() != n || init->rank_bound() != p)) {
    throw DimensionError("solve_rankp: init shape mismatch");
  }

  if (p == 2) {
    std::optional<CirclePoint> circle_init;
    if (init) circle_init = CirclePoint(RowMatrix2(init->rows()));
    SolveReport r = solve_rank2(a, config, circle_init);
    return ObliqueSolveReport{ObliquePoint::from_circle(r.point), r.cost, r.grad_residual,
                              r.hess_min_eig, r.outer_iters, r.matvecs, r.status, r.seed};
  }

  const double grad_tol = config.grad_tol_for(n);
  const double hess_tol = config.hess_tol_for(n);
  const int tcg_max = config.tcg_max_for(n);
  const double trust_max = config.trust_max_for(n);
  double radius = std::min(config.trust_init_for(n), trust_max);

  long long matvecs = 0;
  auto make_frame = [&](ObliquePoint q) {
    matvecs += p;
    Matrix aq = a.apply(q.rows());
    Vector d = (aq.array() * q.rows().array()).rowwise().sum().matrix();
    const double f = d.sum();
    if (!std::isfinite(f)) throw SolverError("solve_rankp: non-finite cost (malformed operator?)");
    return Frame{std::move(q), std::move(aq), std::move(d), f};
  };

  Rng rng = make_rng(config.seed);
  Frame frame = make_frame(init ? *init : random_oblique(n, p, rng));

  EigenOptions eig;
  eig.tol = 0.1 * hess_tol;
  eig.max_iter = static_cast<int>(std::max<Index>(20 * n * p, 2000));
  eig.seed = splitmix64(config.seed ^ 0x0b11e5eedULL);
  const Index dim = n * p;

  auto min_curvature = [&](const Frame& fr) {
    const MatvecFn apply = [&](const Vector& in, Vector& out) {
      const Matrix u = project_rows(fr.q, Eigen::Map<const Matrix>(in.data(), n, p));
      const Matrix hu = half_neg_hessian(a, fr, u);
      out = Eigen::Map<const Vector>(hu.data(), dim);
    };
    EigResult e = extreme_eigenpair(dim, apply, Extreme::smallest, eig);
    matvecs += static_cast<long long>(p) * e.iterations;
    return e;
  };

  ObliqueSolveReport report{frame.q, frame.f, 0.0, std::numeric_limits<double>::quiet_NaN(),
                            0, 0, SolveStatus::iteration_limit, config.seed};
  bool hess_current = false;
  int outer = 0;
  for (; outer < config.max_outer; ++outer) {
    const Matrix g = project_rows(frame.q, 2.0 * frame.aq);
    const double grad_residual = 0.5 * g.norm();
    if (grad_residual <= grad_tol) {
      const EigResult e = min_curvature(frame);
      report.hess_min_eig = e.value;
      hess_current = true;
      if (e.value >= -hess_tol) {
        report.status = SolveStatus::converged;
        break;
      }
      Matrix v = project_rows(frame.q, Eigen::Map<const Matrix>(e.vector.data(), n, p));
      v /= v.norm();
      if ((g.array() * v.array()).sum() < 0.0) v = -v;
      const double gv = (g.array() * v.array()).sum();
      double t = radius;
      bool moved = false;
      for (int attempt = 0; attempt < 60 && !moved; ++attempt, t *= 0.5) {
        const double predicted = t * gv - t * t * e.value;
        Frame candidate = make_frame(retract_rows(frame.q, v, t));
        if (candidate.f - frame.f >= kAcceptRatioOblique * predicted && candidate.f > frame.f) {
          frame = std::move(candidate);
          moved = true;
        }
      }
      if (!moved) {
        report.status = SolveStatus::stagnated;
        break;
      }
      hess_current = false;
      continue;
    }

    const TcgResult step = truncated_cg(a, frame, g, radius, tcg_max);
    matvecs += static_cast<long long>(p) * step.applies;
    Frame candidate = make_frame(retract_rows(frame.q, step.eta, 1.0));
    const double reg = 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(frame.f));
    const double rho = (candidate.f - frame.f + reg) / (step.model_increase + reg);
    if (rho < 0.25) {
      radius *= 0.25;
    } else if (rho > 0.75 && step.boundary) {
      radius = std::min(2.0 * radius, trust_max);
    }
    if (rho > 0.1) {
      frame = std::move(candidate);
      hess_current = false;
    } else if (radius < 1e-14 * trust_max) {
      report.status = SolveStatus::stagnated;
      break;
    }
  }

  report.point = frame.q;
  report.cost = frame.f;
  report.grad_residual = 0.5 * project_rows(frame.q, 2.0 * frame.aq).norm();
  report.outer_iters = outer;
  if (!hess_current) {
    try {
      report.hess_min_eig = min_curvature(frame).value;
    } catch (const EigenNotConverged&) {
      report.hess_min_eig = std::numeric_limits<double>::quiet_NaN();
    }
  }
  report.matvecs = matvecs;
  return report;
}

}  // namespace bmsync
