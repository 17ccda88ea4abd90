#include "bmsync/solver.hpp"

#include "bmsync/parallel.hpp"
#include "bmsync/rng.hpp"
#include "bmsync/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace bmsync {

double SolverConfig::grad_tol_for(Index n) const {
  return grad_tol.value_or(1e-8 * static_cast<double>(n));
}
double SolverConfig::hess_tol_for(Index n) const {
  return hess_tol.value_or(1e-6 * static_cast<double>(n));
}
int SolverConfig::tcg_max_for(Index n) const {
  return tcg_max.value_or(static_cast<int>(std::max<Index>(4 * n, 10)));
}
double SolverConfig::trust_max_for(Index n) const {
  return trust_max.value_or(std::numbers::pi * std::sqrt(static_cast<double>(n)));
}
double SolverConfig::trust_init_for(Index n) const {
  return trust_init.value_or(trust_max_for(n) / 8.0);
}

void SolverConfig::validate() const {
  auto positive = [](const std::optional<double>& v) { return !v || (*v > 0.0 && std::isfinite(*v)); };
  if (!positive(grad_tol)) throw std::invalid_argument("SolverConfig: grad_tol must be > 0");
  if (!positive(hess_tol)) throw std::invalid_argument("SolverConfig: hess_tol must be > 0");
  if (!positive(trust_init)) throw std::invalid_argument("SolverConfig: trust_init must be > 0");
  if (!positive(trust_max)) throw std::invalid_argument("SolverConfig: trust_max must be > 0");
  if (max_outer < 1) throw std::invalid_argument("SolverConfig: max_outer must be >= 1");
  if (tcg_max && *tcg_max < 1) throw std::invalid_argument("SolverConfig: tcg_max must be >= 1");
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::iteration_limit: return "iteration-limit";
    case SolveStatus::stagnated: return "stagnated";
  }
  return "unknown";
}

namespace {

constexpr double kAcceptRatio = 0.1;
constexpr double kShrinkRatio = 0.25;
constexpr double kExpandRatio = 0.75;
// Regularizes ρ when actual and predicted changes are at round-off level.
constexpr double kRhoRegularization = 1e3;

struct TcgResult {
  Vector eta;
  double model_increase = 0.0;  // gᵀη − ηᵀHη
  bool boundary = false;
  int applies = 0;
};

// Steihaug–Toint CG on min −gᵀη + ηᵀHη subject to ‖η‖ ≤ radius.
TcgResult truncated_cg(const SymOp& h, const Vector& g, double radius, int max_iter) {
  const Index n = g.size();
  TcgResult out;
  out.eta = Vector::Zero(n);
  Vector h_eta = Vector::Zero(n);
  Vector r = -g;
  Vector delta = g;
  double rr = r.squaredNorm();
  const double r0 = std::sqrt(rr);
  const double stop = r0 * std::min(r0, 0.1);

  for (int j = 0; j < max_iter && rr > 0.0; ++j) {
    const Vector h_delta = h.apply(delta);
    ++out.applies;
    const double kappa = 2.0 * delta.dot(h_delta);
    const double alpha = rr / kappa;
    const Vector trial = out.eta + alpha * delta;
    if (kappa <= 0.0 || trial.squaredNorm() >= radius * radius) {
      const double dd = delta.squaredNorm();
      const double ed = out.eta.dot(delta);
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
  out.model_increase = g.dot(out.eta) - out.eta.dot(h_eta);
  return out;
}

double trace_cost(const RowMatrix2& aq, const CirclePoint& q) {
  return (aq.array() * q.rows().array()).sum();
}

}  // namespace

SolveReport solve_rank2(const SymOp& a, const SolverConfig& config,
                        const std::optional<CirclePoint>& init) {
  config.validate();
  const Index n = a.size();
  if (init && init->size() != n) throw DimensionError("solve_rank2: init size mismatch");

  const double grad_tol = config.grad_tol_for(n);
  const double hess_tol = config.hess_tol_for(n);
  const int tcg_max = config.tcg_max_for(n);
  const double trust_max = config.trust_max_for(n);
  double radius = std::min(config.trust_init_for(n), trust_max);

  Rng rng = make_rng(config.seed);
  CirclePoint q = init ? *init : random_point(n, rng);

  long long matvecs = 0;
  auto image = [&](const CirclePoint& p) {
    matvecs += 2;
    RowMatrix2 aq = a.apply(Matrix(p.rows()));
    return aq;
  };
  auto checked_cost = [](const RowMatrix2& aq, const CirclePoint& p) {
    const double f = trace_cost(aq, p);
    if (!std::isfinite(f)) throw SolverError("solve_rank2: non-finite cost (malformed operator?)");
    return f;
  };

  RowMatrix2 aq = image(q);
  double f = checked_cost(aq, q);

  EigenOptions eig;
  eig.tol = 0.1 * hess_tol;
  eig.max_iter = static_cast<int>(std::max<Index>(20 * n, 2000));
  eig.seed = splitmix64(config.seed ^ 0xe16e5eedULL);

  SolveReport report{q, f, 0.0, std::numeric_limits<double>::quiet_NaN(), 0, 0,
                     SolveStatus::iteration_limit, config.seed};
  bool hess_current = false;  // hess_min_eig evaluated at the current q

  int outer = 0;
  for (; outer < config.max_outer; ++outer) {
    const TangentCoeffs g = rgrad_from_image(aq, q);
    const double grad_residual = 0.5 * g.norm();
    const SymOp h = hess_matrix_from_image(a, aq, q);

    if (grad_residual <= grad_tol) {
      const EigResult e = extreme_eigenpair(h, Extreme::smallest, eig);
      matvecs += 2LL * e.iterations;
      report.hess_min_eig = e.value;
      hess_current = true;
      if (e.value >= -hess_tol) {
        report.status = SolveStatus::converged;
        break;
      }
      // Negative curvature: follow the eigenvector uphill.
      Vector v = e.vector;
      if (g.dot(v) < 0.0) v = -v;
      double t = radius;
      bool moved = false;
      for (int attempt = 0; attempt < 60 && !moved; ++attempt, t *= 0.5) {
        const double predicted = t * g.dot(v) - t * t * e.value;
        CirclePoint candidate = retract(q, v, t);
        RowMatrix2 aq_c = image(candidate);
        const double f_c = checked_cost(aq_c, candidate);
        if (f_c - f >= kAcceptRatio * predicted && f_c > f) {
          q = std::move(candidate);
          aq = std::move(aq_c);
          f = f_c;
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

    const TcgResult step = truncated_cg(h, g, radius, tcg_max);
    matvecs += 2LL * step.applies;
    CirclePoint candidate = retract(q, step.eta, 1.0);
    RowMatrix2 aq_c = image(candidate);
    const double f_c = checked_cost(aq_c, candidate);
    const double reg = kRhoRegularization * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(f));
    const double rho = (f_c - f + reg) / (step.model_increase + reg);

    if (rho < kShrinkRatio) {
      radius *= 0.25;
    } else if (rho > kExpandRatio && step.boundary) {
      radius = std::min(2.0 * radius, trust_max);
    }
    if (rho > kAcceptRatio) {
      q = std::move(candidate);
      aq = std::move(aq_c);
      f = f_c;
      hess_current = false;
    } else if (radius < 1e-14 * trust_max) {
      report.status = SolveStatus::stagnated;
      break;
    }
  }

  report.point = q;
  report.cost = f;
  report.grad_residual = 0.5 * rgrad_from_image(aq, q).norm();
  report.outer_iters = outer;
  if (!hess_current) {
    try {
      const EigResult e =
          extreme_eigenpair(hess_matrix_from_image(a, aq, q), Extreme::smallest, eig);
      matvecs += 2LL * e.iterations;
      report.hess_min_eig = e.value;
    } catch (const EigenNotConverged& e) {
      report.hess_min_eig = std::numeric_limits<double>::quiet_NaN();
    }
  }
  report.matvecs = matvecs;
  return report;
}

std::vector<SolveReport> multistart(const SymOp& a, int k, const SolverConfig& config,
                                    int workers) {
  if (k < 1) throw std::invalid_argument("multistart: k must be >= 1");
  std::vector<std::optional<SolveReport>> slots(static_cast<std::size_t>(k));
  const int threads = workers > 0 ? workers : resolve_workers(std::nullopt);
  parallel_for(slots.size(), threads, [&](std::size_t trial) {
    SolverConfig local = config;
    local.seed = config.seed ^ static_cast<std::uint64_t>(trial);
    slots[trial] = solve_rank2(a, local);
  });
  std::vector<SolveReport> reports;
  reports.reserve(slots.size());
  for (auto& slot : slots) reports.push_back(std::move(*slot));
  std::stable_sort(reports.begin(), reports.end(),
                   [](const SolveReport& lhs, const SolveReport& rhs) { return lhs.cost > rhs.cost; });
  return reports;
}

}  // namespace bmsync
