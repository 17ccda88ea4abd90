#include "bmsync/config.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>

namespace bmsync {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(key + ": expected a number, got an empty value");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    throw ConfigError(key + ": expected a number, got '" + t + "'");
  }
  return v;
}

template <class Int>
Int parse_integer(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(key + ": expected an integer, got '" + t + "'");
  }
  return v;
}

constexpr std::array<std::pair<Experiment, std::string_view>, 6> kExperimentNames{{
    {Experiment::z2_sweep, "z2-sweep"},
    {Experiment::sbm_sweep, "sbm-sweep"},
    {Experiment::exact_recovery, "exact-recovery"},
    {Experiment::tails, "tails"},
    {Experiment::oracle_audit, "oracle-audit"},
    {Experiment::solve_one, "solve-one"},
}};

bool is_z2(Experiment e) {
  return e == Experiment::z2_sweep || e == Experiment::exact_recovery ||
         e == Experiment::solve_one || e == Experiment::oracle_audit;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
  KeyValueConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(content).substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (config.values_.count(key) != 0) throw ConfigError(where + ": duplicate key '" + key + "'");
    config.values_[key] = trim(std::string_view(content).substr(eq + 1));
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  if (k.empty()) throw ConfigError("override with empty key");
  values_[k] = trim(value);
}

void KeyValueConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  set(std::string(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)));
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  used_.insert(key);
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  return parse_double(*v, key);
}

std::optional<std::int64_t> KeyValueConfig::get_int(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  return parse_integer<std::int64_t>(*v, key);
}

std::optional<std::uint64_t> KeyValueConfig::get_uint(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  return parse_integer<std::uint64_t>(*v, key);
}

std::optional<bool> KeyValueConfig::get_bool(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + *v + "'");
}

std::vector<double> KeyValueConfig::get_list(const std::string& key) const {
  const auto v = get(key);
  if (!v) return {};
  return parse_double_list(*v, key);
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (used_.count(key) == 0) out.push_back(key);
  }
  return out;
}

std::vector<double> parse_double_list(std::string_view text, const std::string& key) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(parse_double(std::string(piece), key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view to_string(Experiment experiment) {
  for (const auto& [e, name] : kExperimentNames) {
    if (e == experiment) return name;
  }
  return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view text) {
  for (const auto& [e, name] : kExperimentNames) {
    if (name == text) return e;
  }
  return std::nullopt;
}

std::size_t ExperimentConfig::grid_size() const {
  switch (experiment) {
    case Experiment::sbm_sweep: return std::max(a_grid.size(), b_grid.size());
    case Experiment::tails: return 1;
    default: return std::max(sigma_grid.size(), lambda_grid.size());
  }
}

SolverConfig solver_config_from(const KeyValueConfig& kv) {
  SolverConfig solver;
  solver.grad_tol = kv.get_double("solver.grad_tol");
  solver.hess_tol = kv.get_double("solver.hess_tol");
  if (auto v = kv.get_int("solver.max_outer")) solver.max_outer = static_cast<int>(*v);
  if (auto v = kv.get_int("solver.tcg_max")) solver.tcg_max = static_cast<int>(*v);
  solver.trust_init = kv.get_double("solver.trust_init");
  solver.trust_max = kv.get_double("solver.trust_max");
  if (auto v = kv.get_uint("solver.seed")) solver.seed = *v;
  return solver;
}

ExperimentConfig ExperimentConfig::from(const KeyValueConfig& kv) {
  ExperimentConfig cfg;
  const std::string name = kv.get_string("experiment", "");
  if (name.empty()) throw ConfigError("missing required key 'experiment'");
  const auto experiment = parse_experiment(name);
  if (!experiment) throw ConfigError("unknown experiment '" + name + "'");
  cfg.experiment = *experiment;

  if (auto v = kv.get_int("model.n")) cfg.n = *v;
  cfg.sigma_grid = kv.get_list("model.sigma");
  cfg.lambda_grid = kv.get_list("model.lambda");
  cfg.a_grid = kv.get_list("model.a");
  cfg.b_grid = kv.get_list("model.b");
  if (auto v = kv.get_int("trials")) cfg.trials = static_cast<int>(*v);
  if (auto v = kv.get_int("restarts")) cfg.restarts = static_cast<int>(*v);
  if (auto v = kv.get_uint("master_seed")) cfg.master_seed = *v;
  if (auto v = kv.get_int("workers")) cfg.workers = static_cast<int>(*v);
  if (auto v = kv.get("output")) cfg.output = *v;
  const std::string format = kv.get_string("format", "csv");
  if (format == "csv") {
    cfg.format = OutputFormat::csv;
  } else if (format == "json") {
    cfg.format = OutputFormat::json;
  } else if (format == "both") {
    cfg.format = OutputFormat::both;
  } else {
    throw ConfigError("format: expected csv, json or both, got '" + format + "'");
  }
  if (auto v = kv.get_bool("record_timing")) cfg.record_timing = *v;
  if (auto v = kv.get_bool("with_sdp")) cfg.with_sdp = *v;
  if (auto v = kv.get_double("certify.tol")) cfg.certify_tol = *v;
  if (kv.contains("tails.t")) cfg.tail_t = kv.get_list("tails.t");
  cfg.tails_model = kv.get_string("tails.model", cfg.tails_model);

  cfg.solver = solver_config_from(kv);

  cfg.assert_min_correlation = kv.get_double("assert.min_correlation");
  cfg.assert_min_exact_rate = kv.get_double("assert.min_exact_rate");
  cfg.assert_max_exact_rate = kv.get_double("assert.max_exact_rate");
  cfg.assert_min_unique_rate = kv.get_double("assert.min_unique_rate");

  const auto unused = kv.unused_keys();
  if (!unused.empty()) {
    std::string list;
    for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config keys: " + list);
  }
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("model.n must be >= 1");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (workers && *workers < 1) throw ConfigError("workers must be >= 1");
  if (!(certify_tol > 0.0)) throw ConfigError("certify.tol must be > 0");
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (experiment == Experiment::tails) {
    if (tails_model != "wigner" && tails_model != "sbm") throw ConfigError("tails.model must be wigner or sbm");
    if (tail_t.empty()) throw ConfigError("tails.t must not be empty");
    if (tails_model == "sbm" && (a_grid.size() != 1 || b_grid.size() != 1)) {
      throw ConfigError("tails with model sbm needs single model.a and model.b values");
    }
    return;
  }
  if (is_z2(experiment)) {
    if (sigma_grid.empty() == lambda_grid.empty()) {
      throw ConfigError("exactly one of model.sigma and model.lambda must be given");
    }
    for (double s : sigma_grid) {
      if (!(s >= 0.0)) throw ConfigError("model.sigma values must be >= 0");
    }
    for (double l : lambda_grid) {
      if (!(l > 0.0)) throw ConfigError("model.lambda values must be > 0");
    }
    if (experiment == Experiment::oracle_audit && n > 16) throw ConfigError("oracle-audit needs model.n <= 16");
    if (experiment == Experiment::solve_one && grid_size() != 1) {
      throw ConfigError("solve-one takes a single noise level");
    }
  } else {
    if (a_grid.empty() || b_grid.empty()) throw ConfigError("sbm-sweep needs model.a and model.b");
    if (a_grid.size() != b_grid.size() && a_grid.size() != 1 && b_grid.size() != 1) {
      throw ConfigError("model.a and model.b must have equal lengths or length 1");
    }
    if (n % 2 != 0) throw ConfigError("sbm-sweep needs even model.n");
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = std::string(to_string(experiment));
  j["model.n"] = n;
  j["model.sigma"] = sigma_grid;
  j["model.lambda"] = lambda_grid;
  j["model.a"] = a_grid;
  j["model.b"] = b_grid;
  j["trials"] = trials;
  j["restarts"] = restarts;
  j["master_seed"] = master_seed;
  j["workers"] = workers ? nlohmann::json(*workers) : nlohmann::json(nullptr);
  j["output"] = output.string();
  j["format"] = format == OutputFormat::csv ? "csv" : format == OutputFormat::json ? "json" : "both";
  j["record_timing"] = record_timing;
  j["with_sdp"] = with_sdp;
  j["certify.tol"] = certify_tol;
  j["tails.t"] = tail_t;
  j["tails.model"] = tails_model;
  auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  j["solver.grad_tol"] = opt(solver.grad_tol);
  j["solver.hess_tol"] = opt(solver.hess_tol);
  j["solver.max_outer"] = solver.max_outer;
  j["solver.tcg_max"] = opt(solver.tcg_max);
  j["solver.trust_init"] = opt(solver.trust_init);
  j["solver.trust_max"] = opt(solver.trust_max);
  j["assert.min_correlation"] = opt(assert_min_correlation);
  j["assert.min_exact_rate"] = opt(assert_min_exact_rate);
  j["assert.max_exact_rate"] = opt(assert_max_exact_rate);
  j["assert.min_unique_rate"] = opt(assert_min_unique_rate);
  return j;
}

}  // namespace bmsync
