#include "bmsync/tails.hpp"

#include "bmsync/certify.hpp"
#include "bmsync/parallel.hpp"
#include "bmsync/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bmsync {
namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json to_json(const Quantiles& q) {
  return {{"min", q.min}, {"median", q.median}, {"q90", q.q90}, {"max", q.max}};
}

}  // namespace

Quantiles quantiles(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("quantiles: empty sample");
  std::sort(values.begin(), values.end());
  // Linear interpolation between order statistics.
  auto at = [&](double level) {
    const double pos = level * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return Quantiles{values.front(), at(0.5), at(0.9), values.back()};
}

WignerTailTable tail_check_wigner(Index n, int trials, const std::vector<double>& t_values,
                                  std::uint64_t seed, int workers) {
  if (trials < 1) throw std::invalid_argument("tail_check_wigner: trials must be >= 1");
  if (n < 2) throw std::invalid_argument("tail_check_wigner: n must be >= 2");
  for (double t : t_values) {
    if (!(t >= 0.0)) throw std::invalid_argument("tail_check_wigner: t must be >= 0");
  }
  WignerTailTable table;
  table.n = n;
  table.trials = trials;
  table.norms.assign(static_cast<std::size_t>(trials), 0.0);
  table.inf_norms.assign(static_cast<std::size_t>(trials), 0.0);
  parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t k) {
    // σ = 1 so that the generated noise is exactly W; z is the planted vector.
    const Z2Instance inst = gen_z2(n, SigmaSnr{1.0}, derive_seed(seed, {k}));
    table.norms[k] = operator_norm(inst.noise);
    table.inf_norms[k] = inst.noise.apply(inst.z).cwiseAbs().maxCoeff();
  });

  const double nd = static_cast<double>(n);
  const double log_n = std::log(nd);
  for (double t : t_values) {
    WignerTailRow row;
    row.t = t;
    row.bound_norm = std::exp(-t * t / 4.0);
    row.bound_inf = std::exp(-t / 2.0);
    const double norm_level = 2.0 * std::sqrt(nd) + t;
    const double inf_level = std::sqrt(2.0 * log_n + t);
    int hits_norm = 0;
    int hits_inf = 0;
    int hits_scaled = 0;
    for (int k = 0; k < trials; ++k) {
      hits_norm += table.norms[k] >= norm_level;
      hits_inf += table.inf_norms[k] >= inf_level;
      hits_scaled += table.inf_norms[k] / std::sqrt(nd) >= inf_level;
    }
    row.freq_norm = hits_norm / static_cast<double>(trials);
    row.freq_inf = hits_inf / static_cast<double>(trials);
    row.freq_inf_scaled = hits_scaled / static_cast<double>(trials);
    table.rows.push_back(row);
  }
  return table;
}

SbmTailTable tail_check_sbm(Index n, double a, double b, int trials, std::uint64_t seed,
                            bool with_sdp, const SolverConfig& config, int workers) {
  if (trials < 1) throw std::invalid_argument("tail_check_sbm: trials must be >= 1");
  SbmTailTable table;
  table.n = n;
  table.a = a;
  table.b = b;
  table.d = (a + b) / 2.0;
  table.trials.resize(static_cast<std::size_t>(trials));
  // Validate once, up front, instead of failing inside every trial.
  const double nd = static_cast<double>(n);
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("tail_check_sbm: n must be even and >= 2");
  if (!(b >= 0.0 && a > b && a <= nd)) throw std::invalid_argument("tail_check_sbm: need 0 <= b < a <= n");

  parallel_for(table.trials.size(), workers, [&](std::size_t k) {
    SbmTailTrial& trial = table.trials[k];
    const SbmInstance inst = gen_sbm(n, DegreeParams{a, b}, derive_seed(seed, {k}));
    const NoiseDecomposition dec = noise_decomposition(inst);
    trial.e_norm = operator_norm(dec.e);
    trial.eg_inf = dec.e.apply(inst.g).cwiseAbs().maxCoeff();
    if (with_sdp) {
      try {
        SolverConfig local = config;
        local.seed = derive_seed(seed, {k, 1});
        const SdpEstimate est = sdp_value_estimate(dec.e, local);
        trial.sdp_lower = est.lower / static_cast<double>(n);
        trial.sdp_upper = est.upper / static_cast<double>(n);
      } catch (const std::exception& e) {
        trial.error = e.what();
      }
    }
  });

  std::vector<double> norms;
  std::vector<double> infs;
  std::vector<double> sdps;
  const double log_n = std::log(static_cast<double>(n));
  for (const SbmTailTrial& t : table.trials) {
    norms.push_back(t.e_norm);
    infs.push_back(t.eg_inf);
    table.c_norm = std::max(table.c_norm, (t.e_norm - 3.0) / std::sqrt(log_n / table.d));
    table.c_inf = std::max(table.c_inf, t.eg_inf / (std::sqrt(log_n) + log_n / std::sqrt(table.d)));
    if (t.sdp_upper) {
      sdps.push_back(*t.sdp_upper);
      if (table.d > 1.0) {
        const double c = (*t.sdp_upper - 2.0) * std::pow(table.d, 0.1) / std::log(table.d);
        table.c_sdp = table.c_sdp ? std::max(*table.c_sdp, c) : c;
      }
    }
  }
  table.c_norm = std::max(table.c_norm, 0.0);
  table.e_norm = quantiles(norms);
  table.eg_inf = quantiles(infs);
  if (!sdps.empty()) table.sdp_upper = quantiles(sdps);
  return table;
}

nlohmann::json to_json(const WignerTailTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const WignerTailRow& r : table.rows) {
    rows.push_back({{"t", r.t},
                    {"freq_norm", r.freq_norm},
                    {"bound_norm", r.bound_norm},
                    {"freq_inf", r.freq_inf},
                    {"freq_inf_scaled", r.freq_inf_scaled},
                    {"bound_inf", r.bound_inf}});
  }
  return {{"n", table.n}, {"trials", table.trials}, {"rows", rows},
          {"norms", table.norms}, {"inf_norms", table.inf_norms}};
}

nlohmann::json to_json(const SbmTailTable& table) {
  nlohmann::json trials = nlohmann::json::array();
  for (const SbmTailTrial& t : table.trials) {
    trials.push_back({{"e_norm", t.e_norm},
                      {"eg_inf", t.eg_inf},
                      {"sdp_lower", optional_json(t.sdp_lower)},
                      {"sdp_upper", optional_json(t.sdp_upper)},
                      {"error", t.error}});
  }
  nlohmann::json j{{"n", table.n},
                   {"a", table.a},
                   {"b", table.b},
                   {"d", table.d},
                   {"trials", trials},
                   {"e_norm", to_json(table.e_norm)},
                   {"eg_inf", to_json(table.eg_inf)},
                   {"c_norm", table.c_norm},
                   {"c_inf", table.c_inf},
                   {"c_sdp", optional_json(table.c_sdp)}};
  j["sdp_upper"] = table.sdp_upper ? to_json(*table.sdp_upper) : nlohmann::json(nullptr);
  return j;
}

}  // namespace bmsync
