#pragma once

#include "bmsync/models.hpp"
#include "bmsync/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace bmsync {

struct WignerTailRow {
  double t = 0.0;
  double freq_norm = 0.0;        // P̂(‖W‖ ≥ 2√n + t)
  double bound_norm = 0.0;       // e^{−t²/4}
  double freq_inf = 0.0;         // P̂(‖Wz‖∞ ≥ √(2 log n + t)), threshold as printed
  double freq_inf_scaled = 0.0;  // P̂(‖Wz‖∞/√n ≥ √(2 log n + t))
  double bound_inf = 0.0;        // e^{−t/2}
};

struct WignerTailTable {
  Index n = 0;
  int trials = 0;
  std::vector<double> norms;      // ‖W‖ per trial
  std::vector<double> inf_norms;  // ‖Wz‖∞ per trial
  std::vector<WignerTailRow> rows;
};

/// Empirical exceedance frequencies for the Wigner spectral-norm and
/// ‖Wz‖∞ tail bounds. Trial k uses seed derive_seed(seed, {k}).
WignerTailTable tail_check_wigner(Index n, int trials, const std::vector<double>& t_values,
                                  std::uint64_t seed, int workers = 1);

struct SbmTailTrial {
  double e_norm = 0.0;               // ‖E‖
  double eg_inf = 0.0;               // ‖Eg‖∞
  std::optional<double> sdp_lower;   // SDP(E)/n bracket
  std::optional<double> sdp_upper;
  std::string error;                 // solver failure, if any
};

struct Quantiles {
  double min = 0.0;
  double median = 0.0;
  double q90 = 0.0;
  double max = 0.0;
};
Quantiles quantiles(std::vector<double> values);

struct SbmTailTable {
  Index n = 0;
  double a = 0.0;
  double b = 0.0;
  double d = 0.0;  // (a+b)/2
  std::vector<SbmTailTrial> trials;
  Quantiles e_norm;
  Quantiles eg_inf;
  std::optional<Quantiles> sdp_upper;
  // Smallest constants C making each bound hold on every trial (reported only).
  double c_norm = 0.0;  // ‖E‖ ≤ 3 + C√(log n/d)
  double c_inf = 0.0;   // ‖Eg‖∞ ≤ C(√log n + log n/√d)
  std::optional<double> c_sdp;  // SDP(E)/n ≤ 2 + C log d/d^{1/10}
};

/// Per-trial ‖E‖, ‖Eg‖∞ and optionally SDP(E)/n for the SBM noise matrix.
SbmTailTable tail_check_sbm(Index n, double a, double b, int trials, std::uint64_t seed,
                            bool with_sdp, const SolverConfig& config = {}, int workers = 1);

nlohmann::json to_json(const WignerTailTable& table);
nlohmann::json to_json(const SbmTailTable& table);

}  // namespace bmsync
