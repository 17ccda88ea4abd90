// bmsync — command-line front end: instance generation, single solves,
// certificates, oracle audits, sweeps and tail checks.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure,
// 3 acceptance-assertion failure.

#include "bmsync/certify.hpp"
#include "bmsync/circle.hpp"
#include "bmsync/config.hpp"
#include "bmsync/matrix_io.hpp"
#include "bmsync/models.hpp"
#include "bmsync/oracle.hpp"
#include "bmsync/recover.hpp"
#include "bmsync/results.hpp"
#include "bmsync/serialize.hpp"
#include "bmsync/solver.hpp"
#include "bmsync/sweep.hpp"
#include "bmsync/version.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace bmsync;

namespace {

enum Exit { kOk = 0, kConfig = 1, kRuntime = 2, kAssertion = 3 };

// Config file (optional) plus --set overrides, in command-line order.
struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", file, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("-s,--set", overrides, "override, e.g. --set solver.grad_tol=1e-6");
  }

  KeyValueConfig load() const {
    KeyValueConfig kv = file.empty() ? KeyValueConfig{} : KeyValueConfig::load(file);
    for (const auto& o : overrides) kv.apply_override(o);
    return kv;
  }
};

void reject_unused(const KeyValueConfig& kv) {
  const auto unused = kv.unused_keys();
  if (unused.empty()) return;
  std::string list;
  for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
  throw ConfigError("unknown config keys: " + list);
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct Loaded {
  SymOp op;
  std::optional<Vector> truth;
};

// Observation operator stored at `path`. With an instance sidecar next to it,
// Z₂ files hold W (Y is rebuilt) and SBM files the adjacency (centred), and the
// planted labels come along; otherwise the matrix is taken as is.
Loaded load_operator(const fs::path& path) {
  const fs::path side = sidecar_path(path);
  if (fs::exists(side)) {
    std::ifstream in(side);
    const auto model = nlohmann::json::parse(in).value("model", std::string());
    if (model == "z2") {
      Z2Instance inst = read_z2_instance(path);
      return {inst.y, inst.z};
    }
    if (model == "sbm") {
      SbmInstance inst = read_sbm_instance(path);
      return {inst.centered, inst.g};
    }
  }
  return {read_coordinate(path), std::nullopt};
}

// ---------------------------------------------------------------- gen

int cmd_gen(const ConfigArgs& args, const std::string& out_override) {
  const KeyValueConfig kv = args.load();
  const auto n = kv.get_int("model.n").value_or(200);
  const auto seed = kv.get_uint("master_seed").value_or(0);
  const auto sigma = kv.get_double("model.sigma");
  const auto lambda = kv.get_double("model.lambda");
  const auto a = kv.get_double("model.a");
  const auto b = kv.get_double("model.b");
  const auto p = kv.get_double("model.p");
  const auto q = kv.get_double("model.q");
  const fs::path out = out_override.empty() ? fs::path(kv.get_string("output", "instance.txt"))
                                            : fs::path(out_override);
  kv.get("experiment");  // tolerated so sweep configs can be reused
  reject_unused(kv);

  const int z2_keys = (sigma ? 1 : 0) + (lambda ? 1 : 0);
  const bool sbm_deg = a && b;
  const bool sbm_prob = p && q;
  if (z2_keys + (sbm_deg ? 1 : 0) + (sbm_prob ? 1 : 0) != 1) {
    throw ConfigError("gen needs exactly one of model.sigma, model.lambda, model.a+model.b, model.p+model.q");
  }
  if (z2_keys == 1) {
    const Snr snr = sigma ? Snr{SigmaSnr{*sigma}} : Snr{LambdaSnr{*lambda}};
    const Z2Instance inst = gen_z2(n, snr, seed);
    write_instance(out, inst);
    print_json({{"model", "z2"}, {"n", n}, {"sigma", inst.sigma}, {"seed", seed},
                {"matrix", out.string()}, {"sidecar", sidecar_path(out).string()}});
  } else {
    const SbmParams params = sbm_deg ? SbmParams{DegreeParams{*a, *b}} : SbmParams{ProbParams{*p, *q}};
    const SbmInstance inst = gen_sbm(n, params, seed);
    write_instance(out, inst);
    print_json({{"model", "sbm"}, {"n", n}, {"p", inst.p}, {"q", inst.q}, {"lambda_ab", inst.lambda_ab},
                {"seed", seed}, {"matrix", out.string()}, {"sidecar", sidecar_path(out).string()}});
  }
  return kOk;
}

// ---------------------------------------------------------------- solve

int cmd_solve(const ConfigArgs& args, const std::string& matrix, const std::string& init,
              const std::string& point_out, int restarts) {
  const KeyValueConfig kv = args.load();
  const SolverConfig solver = solver_config_from(kv);
  reject_unused(kv);
  solver.validate();

  const auto [a, truth] = load_operator(matrix);
  std::optional<CirclePoint> start;
  if (!init.empty()) start = read_point(fs::path(init));

  SolveReport best = restarts > 1 && !start ? multistart(a, restarts, solver, 0).front()
                                            : solve_rank2(a, solver, start);
  nlohmann::json j = to_json(best);
  if (truth) {
    Rng rng = make_rng(derive_seed(best.seed, {0x20}));
    j["recovery"] = to_json(recovery_metrics(best.point, *truth, rng));
  }
  if (!point_out.empty()) {
    write_point(fs::path(point_out), best.point);
    j["point_file"] = point_out;
  }
  print_json(j);
  return kOk;
}

// ---------------------------------------------------------------- certify

int cmd_certify(const std::string& matrix, const std::string& point, double tol, bool with_sdp) {
  const auto [a, truth] = load_operator(matrix);
  const CirclePoint q = read_point(fs::path(point));
  if (q.size() != a.size()) throw DimensionError("point and matrix sizes differ");
  const double norm = operator_norm(a);
  const CertificateReport report = dual_certificate(a, q, tol, norm, truth ? &*truth : nullptr);
  nlohmann::json j = to_json(report);
  j["cost"] = cost(a, q);
  j["sdp_upper"] = sdp_upper_bound(a, q.rows(), norm);
  if (truth) j["unique"] = to_json(uniqueness_report(a, *truth, tol, norm));
  if (with_sdp) j["sdp_estimate"] = to_json(sdp_value_estimate(a, SolverConfig{}));
  print_json(j);
  return kOk;
}

// ---------------------------------------------------------------- oracle

int cmd_oracle(const std::string& matrix, int workers) {
  const SymOp a = load_operator(matrix).op;
  if (a.size() <= kSocMaxN) {
    print_json(to_json(lemma4_audit(a, workers), a));
  } else {
    print_json(to_json(mle_bruteforce(a, workers)));
  }
  return kOk;
}

// ---------------------------------------------------------------- sweep / tails

ExperimentConfig experiment_config(const ConfigArgs& args, const char* forced) {
  KeyValueConfig kv = args.load();
  if (forced != nullptr) {
    const auto current = kv.get("experiment");
    if (current && *current != forced) {
      throw ConfigError(std::string("experiment must be ") + forced + ", got '" + *current + "'");
    }
    kv.set("experiment", forced);
  }
  return ExperimentConfig::from(kv);
}

int cmd_sweep(const ExperimentConfig& cfg) {
  if (cfg.experiment == Experiment::tails) {
    const nlohmann::json table = run_tails(cfg);
    const nlohmann::json manifest = make_manifest(cfg.to_json(), cfg.master_seed);
    fs::path stem = cfg.output;
    if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
    write_json(fs::path(stem.string() + ".json"), table);
    write_json(fs::path(stem.string() + ".manifest.json"), manifest);
    std::cerr << "wrote " << stem.string() << ".json\n";
    return kOk;
  }

  const SweepResult result = run_sweep(cfg);
  if (cfg.output.has_parent_path()) fs::create_directories(cfg.output.parent_path());
  const bool csv = cfg.format != OutputFormat::json;
  const bool json = cfg.format != OutputFormat::csv;
  const EmitPaths paths = emit_results(result.rows, csv, json, cfg.output,
                                       make_manifest(cfg.to_json(), cfg.master_seed));
  write_json(fs::path(cfg.output.string() + ".aggregates.json"), to_json(result.aggregates));
  if (paths.csv) std::cerr << "wrote " << paths.csv->string() << '\n';
  if (paths.json) std::cerr << "wrote " << paths.json->string() << '\n';
  print_json(to_json(result.aggregates));

  const AssertionOutcome outcome = check_assertions(cfg, result.aggregates);
  for (const auto& f : outcome.failures) std::cerr << "assertion failed: " << f << '\n';
  return outcome.ok ? kOk : kAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-2 Burer–Monteiro for Z2 synchronization and the two-community SBM"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  ConfigArgs gen_args, solve_args, sweep_args, tails_args;
  std::string gen_out, matrix, init, point_out, point;
  int restarts = 1;
  double tol = kDefaultCertifyTol;
  bool with_sdp = false;
  int workers = 1;

  auto* gen = app.add_subcommand("gen", "generate a Z2 or SBM instance");
  gen_args.attach(gen);
  gen->add_option("-o,--out", gen_out, "matrix path; the sidecar goes to <out>.json");

  auto* solve = app.add_subcommand("solve", "solve the rank-2 program for one matrix");
  solve_args.attach(solve);
  solve->add_option("-m,--matrix", matrix, "coordinate-format matrix")->required()->check(CLI::ExistingFile);
  solve->add_option("--init", init, "initial point file")->check(CLI::ExistingFile);
  solve->add_option("-o,--out", point_out, "write the final point here");
  solve->add_option("-k,--restarts", restarts, "multistart count (random inits only)")->check(CLI::PositiveNumber);

  auto* certify = app.add_subcommand("certify", "certificate report for a point");
  certify->add_option("-m,--matrix", matrix, "coordinate-format matrix")->required()->check(CLI::ExistingFile);
  certify->add_option("-p,--point", point, "point file")->required()->check(CLI::ExistingFile);
  certify->add_option("--tol", tol, "relative certificate tolerance")->check(CLI::PositiveNumber);
  certify->add_flag("--sdp", with_sdp, "also run the staircase SDP estimate");

  auto* oracle = app.add_subcommand("oracle", "exhaustive MLE and rank-1 audit (n <= 20 / 16)");
  oracle->add_option("-m,--matrix", matrix, "coordinate-format matrix")->required()->check(CLI::ExistingFile);
  oracle->add_option("-w,--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "run an experiment sweep from a config");
  sweep_args.attach(sweep);

  auto* tails = app.add_subcommand("tails", "tail-bound tables (experiment = tails)");
  tails_args.attach(tails);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) return cmd_gen(gen_args, gen_out);
    if (*solve) return cmd_solve(solve_args, matrix, init, point_out, restarts);
    if (*certify) return cmd_certify(matrix, point, tol, with_sdp);
    if (*oracle) return cmd_oracle(matrix, workers);
    if (*sweep) return cmd_sweep(experiment_config(sweep_args, nullptr));
    if (*tails) return cmd_sweep(experiment_config(tails_args, "tails"));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
