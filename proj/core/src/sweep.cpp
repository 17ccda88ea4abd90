#include "bmsync/sweep.hpp"

#include "bmsync/certify.hpp"
#include "bmsync/models.hpp"
#include "bmsync/oracle.hpp"
#include "bmsync/parallel.hpp"
#include "bmsync/recover.hpp"
#include "bmsync/rng.hpp"
#include "bmsync/solver.hpp"
#include "bmsync/tails.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace bmsync {
namespace {

// Everything a restart needs from its (grid, trial) instance.
struct Planted {
  SymOp a;
  Vector truth;
  double norm_a = 0.0;
  NoiseSummary noise;
  std::optional<bool> unique;
  std::optional<Lemma4Audit> audit;
};

struct GridPoint {
  std::optional<double> sigma;
  std::optional<double> lambda;
  std::optional<double> a;
  std::optional<double> b;
};

GridPoint grid_point(const ExperimentConfig& cfg, std::size_t g) {
  GridPoint p;
  if (cfg.experiment == Experiment::sbm_sweep) {
    p.a = cfg.a_grid.size() == 1 ? cfg.a_grid[0] : cfg.a_grid[g];
    p.b = cfg.b_grid.size() == 1 ? cfg.b_grid[0] : cfg.b_grid[g];
  } else if (!cfg.sigma_grid.empty()) {
    p.sigma = cfg.sigma_grid[g];
  } else {
    p.lambda = cfg.lambda_grid[g];
  }
  return p;
}

Planted make_planted(const ExperimentConfig& cfg, const GridPoint& point, std::uint64_t seed,
                     ResultRecord& proto) {
  Planted out;
  if (cfg.experiment == Experiment::sbm_sweep) {
    const SbmInstance inst = gen_sbm(cfg.n, DegreeParams{*point.a, *point.b}, seed);
    out.a = inst.centered;
    out.truth = inst.g;
    out.noise = summarize_noise(inst, cfg.with_sdp, cfg.solver);
    proto.lambda = inst.lambda_ab;
  } else {
    const Snr snr = point.sigma ? Snr{SigmaSnr{*point.sigma}} : Snr{LambdaSnr{*point.lambda}};
    const Z2Instance inst = gen_z2(cfg.n, snr, seed);
    out.a = inst.y;
    out.truth = inst.z;
    out.noise = summarize_noise(inst, cfg.with_sdp, cfg.solver);
    proto.sigma = inst.sigma;
    proto.lambda = inst.lambda;
  }
  out.norm_a = operator_norm(out.a);
  if (cfg.experiment == Experiment::exact_recovery) {
    out.unique = uniqueness_report(out.a, out.truth, cfg.certify_tol, out.norm_a).unique;
  }
  if (cfg.experiment == Experiment::oracle_audit) out.audit = lemma4_audit(out.a);
  return out;
}

void fill_restart(const ExperimentConfig& cfg, const Planted& planted, ResultRecord& row) {
  SolverConfig solver = cfg.solver;
  solver.seed = row.seed;
  const SolveReport report = solve_rank2(planted.a, solver);
  row.status = std::string(to_string(report.status));
  row.cost = report.cost;
  row.grad_residual = report.grad_residual;
  row.hess_min_eig = report.hess_min_eig;
  row.outer_iters = report.outer_iters;
  row.matvecs = report.matvecs;

  const Vector* truth = cfg.experiment == Experiment::exact_recovery ? &planted.truth : nullptr;
  const CertificateReport cert =
      dual_certificate(planted.a, report.point, cfg.certify_tol, planted.norm_a, truth);
  row.s_min_eig = cert.s_min_eig;
  row.q_rank = cert.q_rank;
  row.verdict = std::string(to_string(cert.verdict));

  Rng rounding = make_rng(derive_seed(row.seed, {0x20}));
  const RecoveryMetrics m = recovery_metrics(report.point, planted.truth, rounding);
  row.correlation = m.correlation;
  row.overlap = m.overlap;
  row.exact = m.exact;
  row.frobenius_gap = m.frobenius_gap;
  row.sdp_upper = sdp_upper_bound(planted.a, Matrix(report.point.rows()), planted.norm_a);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment == Experiment::tails) {
    throw std::invalid_argument("run_sweep: the tails experiment has no result rows; use run_tails");
  }
  const std::size_t grids = cfg.grid_size();
  const auto trials = static_cast<std::size_t>(cfg.trials);
  const auto restarts = static_cast<std::size_t>(cfg.restarts);
  SweepResult result;
  result.rows.resize(grids * trials * restarts);

  const int workers = resolve_workers(cfg.workers);
  parallel_for(grids * trials, workers, [&](std::size_t task) {
    const std::size_t g = task / trials;
    const std::size_t t = task % trials;
    const GridPoint point = grid_point(cfg, g);

    ResultRecord proto;
    proto.experiment = std::string(to_string(cfg.experiment));
    proto.n = cfg.n;
    proto.grid = static_cast<std::int64_t>(g);
    proto.trial = static_cast<std::int64_t>(t);
    proto.sigma = point.sigma;
    proto.lambda = point.lambda;
    proto.a = point.a;
    proto.b = point.b;

    std::optional<Planted> planted;
    std::string setup_error;
    try {
      planted = make_planted(cfg, point, derive_seed(cfg.master_seed, {g, t}), proto);
      proto.gamma_hat = planted->noise.gamma_hat;
      proto.c = planted->noise.c;
      proto.norm_bound = static_cast<double>(cfg.n) * planted->norm_a;
      proto.unique = planted->unique;
      if (planted->audit) {
        proto.mle_value = planted->audit->mle.best_value;
        proto.soc_count = static_cast<std::int64_t>(planted->audit->mle.soc_rank1_points.size());
        proto.lemma4_holds = planted->audit->holds;
      }
    } catch (const std::exception& e) {
      setup_error = e.what();
    }

    for (std::size_t r = 0; r < restarts; ++r) {
      ResultRecord row = proto;
      row.restart = static_cast<std::int64_t>(r);
      row.seed = derive_seed(cfg.master_seed, {g, t, r});
      const auto start = std::chrono::steady_clock::now();
      if (!planted) {
        row.status = "error";
        row.error = setup_error;
      } else {
        try {
          fill_restart(cfg, *planted, row);
        } catch (const std::exception& e) {
          row.status = "error";
          row.error = e.what();
        }
      }
      if (cfg.record_timing) {
        row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
      result.rows[task * restarts + r] = std::move(row);
    }
  });
  result.aggregates = aggregate(result.rows);
  return result;
}

std::vector<GridAggregate> aggregate(const ResultTable& rows) {
  std::vector<GridAggregate> out;
  for (const ResultRecord& row : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const GridAggregate& g) { return g.grid == row.grid; });
    if (it == out.end()) {
      GridAggregate g;
      g.grid = row.grid;
      g.sigma = row.sigma;
      g.lambda = row.lambda;
      g.a = row.a;
      g.b = row.b;
      out.push_back(g);
      it = out.end() - 1;
    }
    ++it->rows;
  }
  for (GridAggregate& g : out) {
    std::vector<double> corr;
    std::int64_t exact = 0;
    std::int64_t certified = 0;
    std::int64_t unique_seen = 0;
    std::int64_t unique_true = 0;
    for (const ResultRecord& row : rows) {
      if (row.grid != g.grid) continue;
      if (!row.error.empty()) ++g.failures;
      if (row.status == "converged") ++g.converged;
      if (row.correlation) corr.push_back(*row.correlation);
      if (row.exact.value_or(false)) ++exact;
      if (row.verdict == "rank-deficient-global" || row.verdict == "global-unique-ground-truth") ++certified;
      if (row.unique) {
        ++unique_seen;
        unique_true += *row.unique;
      }
    }
    if (!corr.empty()) {
      g.min_correlation = *std::min_element(corr.begin(), corr.end());
      g.median_correlation = median(corr);
    }
    g.exact_rate = static_cast<double>(exact) / static_cast<double>(g.rows);
    g.certificate_rate = static_cast<double>(certified) / static_cast<double>(g.rows);
    if (unique_seen > 0) g.unique_rate = static_cast<double>(unique_true) / static_cast<double>(unique_seen);
  }
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.grid < r.grid; });
  return out;
}

nlohmann::json to_json(const std::vector<GridAggregate>& aggregates) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  auto finite = [](const std::optional<double>& v) {
    if (!v) return nlohmann::json(nullptr);
    return std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json(std::isinf(*v) ? "inf" : "nan");
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const GridAggregate& g : aggregates) {
    arr.push_back({{"grid", g.grid},
                   {"sigma", finite(g.sigma)},
                   {"lambda", finite(g.lambda)},
                   {"a", opt(g.a)},
                   {"b", opt(g.b)},
                   {"rows", g.rows},
                   {"failures", g.failures},
                   {"converged", g.converged},
                   {"min_correlation", opt(g.min_correlation)},
                   {"median_correlation", opt(g.median_correlation)},
                   {"exact_rate", g.exact_rate},
                   {"certificate_rate", g.certificate_rate},
                   {"unique_rate", opt(g.unique_rate)}});
  }
  return arr;
}

AssertionOutcome check_assertions(const ExperimentConfig& cfg,
                                  const std::vector<GridAggregate>& aggregates) {
  AssertionOutcome out;
  auto fail = [&](const GridAggregate& g, const std::string& what) {
    out.ok = false;
    out.failures.push_back("grid " + std::to_string(g.grid) + ": " + what);
  };
  for (const GridAggregate& g : aggregates) {
    if (cfg.assert_min_correlation) {
      if (!g.min_correlation || *g.min_correlation < *cfg.assert_min_correlation) {
        fail(g, "min correlation " + (g.min_correlation ? std::to_string(*g.min_correlation) : "n/a") +
                    " < " + std::to_string(*cfg.assert_min_correlation));
      }
    }
    if (cfg.assert_min_exact_rate && g.exact_rate < *cfg.assert_min_exact_rate) {
      fail(g, "exact rate " + std::to_string(g.exact_rate) + " < " + std::to_string(*cfg.assert_min_exact_rate));
    }
    if (cfg.assert_max_exact_rate && g.exact_rate > *cfg.assert_max_exact_rate) {
      fail(g, "exact rate " + std::to_string(g.exact_rate) + " > " + std::to_string(*cfg.assert_max_exact_rate));
    }
    if (cfg.assert_min_unique_rate) {
      if (!g.unique_rate || *g.unique_rate < *cfg.assert_min_unique_rate) {
        fail(g, "uniqueness rate " + (g.unique_rate ? std::to_string(*g.unique_rate) : "n/a") + " < " +
                    std::to_string(*cfg.assert_min_unique_rate));
      }
    }
    if (g.failures > 0 && (cfg.assert_min_correlation || cfg.assert_min_exact_rate)) {
      fail(g, std::to_string(g.failures) + " failed rows");
    }
  }
  return out;
}

nlohmann::json run_tails(const ExperimentConfig& cfg) {
  cfg.validate();
  const int workers = resolve_workers(cfg.workers);
  if (cfg.tails_model == "sbm") {
    return to_json(tail_check_sbm(cfg.n, cfg.a_grid[0], cfg.b_grid[0], cfg.trials, cfg.master_seed,
                                  cfg.with_sdp, cfg.solver, workers));
  }
  return to_json(tail_check_wigner(cfg.n, cfg.trials, cfg.tail_t, cfg.master_seed, workers));
}

}  // namespace bmsync
