#pragma once

#include "bmsync/solver.hpp"
#include "bmsync/symop.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>

#include <nlohmann/json.hpp>

namespace bmsync {

/// Noise level given either as σ or as λ = √n/σ.
struct SigmaSnr {
  double value = 0.0;
};
struct LambdaSnr {
  double value = 0.0;
};
using Snr = std::variant<SigmaSnr, LambdaSnr>;

struct Z2Instance {
  Vector z;       // planted signs
  SymOp noise;    // W: symmetric, zero diagonal, N(0,1) above the diagonal
  SymOp y;        // zzᵀ + σW
  double sigma = 0.0;
  double lambda = 0.0;  // √n/σ; +∞ when σ = 0
  std::uint64_t seed = 0;
};

/// Y = zzᵀ + σW. Throws std::invalid_argument for n < 1, σ < 0 or λ ≤ 0.
Z2Instance gen_z2(Index n, Snr snr, std::uint64_t seed);

/// Edge probabilities, either as (p, q) or as average-degree parameters (a, b)
/// with p = a/n, q = b/n.
struct ProbParams {
  double p = 0.0;
  double q = 0.0;
};
struct DegreeParams {
  double a = 0.0;
  double b = 0.0;
};
using SbmParams = std::variant<ProbParams, DegreeParams>;

struct SbmInstance {
  Vector g;                // balanced community labels
  SymOp adjacency;         // sparse, diagonal entries included
  SymOp centered;          // A♮ = A − (p+q)/2·𝟏𝟏ᵀ
  double p = 0.0;
  double q = 0.0;
  double a = 0.0;          // p·n
  double b = 0.0;          // q·n
  double lambda_ab = 0.0;  // (a−b)/√(2(a+b))
  std::uint64_t seed = 0;
};

/// Two-community SBM with exactly n/2 nodes per community. Every pair i ≤ j,
/// including i = j, is an independent Bernoulli edge. Throws for odd n,
/// p ≤ q or probabilities outside [0, 1].
SbmInstance gen_sbm(Index n, SbmParams params, std::uint64_t seed);

struct LambdaParams {
  double lambda_ab = 0.0;     // (a−b)/√(2(a+b)) with a = pn, b = qn
  double lambda_tilde = 0.0;  // (p−q)√n/√(2(p+q))
};
/// Requires p ≥ q ≥ 0 and p + q > 0; the two values agree algebraically.
LambdaParams lambda_params(double p, double q, Index n);

struct NoiseDecomposition {
  SymOp e;         // zero-diagonal noise
  Vector d;        // diagonal remainder D
  double scale;    // √(2/((p+q)n))
  double degree;   // d = (a+b)/2
  double lambda;   // λ̃(p, q)
};

/// s·A♮ − D = (λ̃/n)·ggᵀ + E with s = √(2/((p+q)n)). Off-diagonal entries of
/// E/s are A_ij − p within and A_ij − q across communities.
NoiseDecomposition noise_decomposition(const SbmInstance& inst);

/// Statistics of a perturbation Δ in A = zzᵀ + σΔ, σ = c√n.
struct NoiseSummary {
  double spec_norm = 0.0;        // ‖Δ‖
  double inf_norm_signal = 0.0;  // ‖Δz‖∞
  std::optional<double> sdp_over_n;  // SDP(Δ)/n upper estimate
  double gamma_hat = 0.0;        // max(‖Δ‖/√n, ‖Δz‖∞/√(n log n))
  double c = 0.0;                // σ/√n
};

double gamma_hat(double spec_norm, double inf_norm_signal, Index n);

/// Δ = W, c = σ/√n.
NoiseSummary summarize_noise(const Z2Instance& inst, bool with_sdp = false,
                             const SolverConfig& config = {});
/// Rescaling s·A♮ − D by n/λ̃ gives ggᵀ + σΔ with Δ = √n·E and c = 1/λ̃.
NoiseSummary summarize_noise(const SbmInstance& inst, bool with_sdp = false,
                             const SolverConfig& config = {});

/// Writes the matrix in coordinate format (W for Z₂, the adjacency for SBM) and
/// a JSON sidecar at `<path>.json` with the parameters, seed and labels.
void write_instance(const std::filesystem::path& path, const Z2Instance& inst);
void write_instance(const std::filesystem::path& path, const SbmInstance& inst);
Z2Instance read_z2_instance(const std::filesystem::path& path);
SbmInstance read_sbm_instance(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& path);

nlohmann::json to_json(const NoiseSummary& summary);

}  // namespace bmsync
