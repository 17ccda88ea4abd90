#pragma once

#include "bmsync/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace bmsync {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` text with dotted keys; `#` starts a comment. Lists are
/// comma separated. Every typed getter marks its key as used so leftovers can
/// be reported as unknown.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  /// Sets or replaces a key (command-line overrides).
  void set(const std::string& key, const std::string& value);
  /// `key=value` form of set().
  void apply_override(std::string_view assignment);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<std::uint64_t> get_uint(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;

  /// Keys never read through a getter.
  std::vector<std::string> unused_keys() const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

enum class Experiment { z2_sweep, sbm_sweep, exact_recovery, tails, oracle_audit, solve_one };
std::string_view to_string(Experiment experiment);
std::optional<Experiment> parse_experiment(std::string_view text);

enum class OutputFormat { csv, json, both };

struct ExperimentConfig {
  Experiment experiment = Experiment::z2_sweep;
  Index n = 200;
  std::vector<double> sigma_grid;   // Z₂: exactly one of sigma/lambda grids
  std::vector<double> lambda_grid;
  std::vector<double> a_grid;       // SBM: zipped with b_grid; length-1 lists broadcast
  std::vector<double> b_grid;
  int trials = 10;
  int restarts = 1;
  SolverConfig solver;
  std::uint64_t master_seed = 0;
  std::optional<int> workers;
  std::filesystem::path output = "results";
  OutputFormat format = OutputFormat::csv;
  bool record_timing = true;  // false leaves wall_time empty so tables compare bit-exactly
  bool with_sdp = false;
  double certify_tol = 1e-9;
  std::vector<double> tail_t{2.0, 4.0, 6.0};
  std::string tails_model = "wigner";  // wigner | sbm

  std::optional<double> assert_min_correlation;
  std::optional<double> assert_min_exact_rate;
  std::optional<double> assert_max_exact_rate;
  std::optional<double> assert_min_unique_rate;

  /// Number of grid points for the configured experiment.
  std::size_t grid_size() const;

  /// Reads and validates; throws ConfigError on unknown keys or bad values.
  static ExperimentConfig from(const KeyValueConfig& kv);
  void validate() const;
  nlohmann::json to_json() const;
};

/// The solver.* keys (grad_tol, hess_tol, max_outer, tcg_max, trust_init,
/// trust_max, seed). Sweeps override the seed per restart.
SolverConfig solver_config_from(const KeyValueConfig& kv);

/// Parses a comma-separated list of doubles; throws ConfigError.
std::vector<double> parse_double_list(std::string_view text, const std::string& key);

}  // namespace bmsync
