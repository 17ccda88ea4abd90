#pragma once

#include "bmsync/circle.hpp"
#include "bmsync/oblique.hpp"
#include "bmsync/symop.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace bmsync {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Trust-region settings. Unset tolerances scale with n because the residuals
/// are extensive: grad_tol = 1e-8·n on ‖(ddiag(AQQᵀ)−A)Q‖_F and
/// hess_tol = 1e-6·n on −λ_min(H(Q)).
struct SolverConfig {
  std::optional<double> grad_tol;
  std::optional<double> hess_tol;
  int max_outer = 1000;
  std::optional<int> tcg_max;         // default 4n
  std::optional<double> trust_init;   // default trust_max / 8
  std::optional<double> trust_max;    // default π·√n
  std::uint64_t seed = 0;

  double grad_tol_for(Index n) const;
  double hess_tol_for(Index n) const;
  int tcg_max_for(Index n) const;
  double trust_max_for(Index n) const;
  double trust_init_for(Index n) const;
  /// Throws std::invalid_argument when a tolerance or budget is not positive.
  void validate() const;
};

enum class SolveStatus { converged, iteration_limit, stagnated };
std::string_view to_string(SolveStatus status);

struct SolveReport {
  CirclePoint point;
  double cost = 0.0;
  double grad_residual = 0.0;  // ‖(ddiag(AQQᵀ)−A)Q‖_F = ‖rgrad‖/2
  double hess_min_eig = 0.0;   // λ_min(H(Q)); NaN if it could not be computed
  int outer_iters = 0;
  long long matvecs = 0;
  SolveStatus status = SolveStatus::iteration_limit;
  std::uint64_t seed = 0;
};

struct ObliqueSolveReport {
  ObliquePoint point;
  double cost = 0.0;
  double grad_residual = 0.0;
  double hess_min_eig = 0.0;  // λ_min of ½·(−Hess f) on the tangent space
  int outer_iters = 0;
  long long matvecs = 0;
  SolveStatus status = SolveStatus::iteration_limit;
  std::uint64_t seed = 0;
};

/// Maximizes Tr(QᵀAQ) over the product of circles.
///
/// Riemannian trust-region with truncated CG in tangent coefficients. Once the
/// first-order residual is below grad_tol, λ_min(H(Q)) is computed; if it is
/// below −hess_tol the solver steps along that eigenvector and continues.
/// Throws SolverError on a non-finite cost.
SolveReport solve_rank2(const SymOp& a, const SolverConfig& config,
                        const std::optional<CirclePoint>& init = std::nullopt);

/// Same program with Q ∈ ℝ^{n×p}. p = 2 delegates to solve_rank2.
ObliqueSolveReport solve_rankp(const SymOp& a, Index p, const SolverConfig& config,
                               const std::optional<ObliquePoint>& init = std::nullopt);

/// k independent solve_rank2 runs with seeds config.seed ⊕ trial, sorted by cost
/// descending (lower trial index first on ties). `workers` ≤ 0 means the
/// resolved default worker count.
std::vector<SolveReport> multistart(const SymOp& a, int k, const SolverConfig& config,
                                    int workers = 1);

}  // namespace bmsync
