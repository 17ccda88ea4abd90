#pragma once

#include "bmsync/config.hpp"
#include "bmsync/results.hpp"

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace bmsync {

struct GridAggregate {
  std::int64_t grid = 0;
  std::optional<double> sigma;
  std::optional<double> lambda;
  std::optional<double> a;
  std::optional<double> b;
  std::int64_t rows = 0;
  std::int64_t failures = 0;   // rows carrying an error
  std::int64_t converged = 0;  // status == converged
  std::optional<double> min_correlation;
  std::optional<double> median_correlation;
  double exact_rate = 0.0;
  double certificate_rate = 0.0;  // verdict proves global optimality
  std::optional<double> unique_rate;
};

struct SweepResult {
  ResultTable rows;  // ordered by (grid, trial, restart)
  std::vector<GridAggregate> aggregates;
};

/// Runs every grid point × trial × restart of a row-based experiment
/// (z2-sweep, sbm-sweep, exact-recovery, oracle-audit, solve-one).
///
/// Instance seeds are derive_seed(master, {grid, trial}) and solver seeds
/// derive_seed(master, {grid, trial, restart}); rows land in preallocated
/// slots, so the table does not depend on the worker count. Per-trial
/// failures are recorded in the row's error column and never abort the sweep.
SweepResult run_sweep(const ExperimentConfig& cfg);

std::vector<GridAggregate> aggregate(const ResultTable& rows);
nlohmann::json to_json(const std::vector<GridAggregate>& aggregates);

struct AssertionOutcome {
  bool ok = true;
  std::vector<std::string> failures;
};

/// Evaluates the assert.* keys against the aggregates.
AssertionOutcome check_assertions(const ExperimentConfig& cfg,
                                  const std::vector<GridAggregate>& aggregates);

/// The tails experiment: Wigner or SBM tail tables as JSON.
nlohmann::json run_tails(const ExperimentConfig& cfg);

}  // namespace bmsync
