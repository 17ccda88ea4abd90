#pragma once

#include "bmsync/symop.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>

namespace bmsync {

enum class Extreme { smallest, largest };

struct EigResult {
  double value = 0.0;
  Vector vector;          // unit norm
  double residual = 0.0;  // ‖A v − value·v‖₂
  int iterations = 0;     // operator applications
};

/// Raised when an eigen-solve misses its residual target within the budget.
/// Carries the best Ritz pair found so callers can still inspect it.
class EigenNotConverged : public std::runtime_error {
 public:
  EigenNotConverged(const std::string& what, EigResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const EigResult& best() const { return best_; }

 private:
  EigResult best_;
};

/// Out-of-place matrix-free operator: out = A·in.
using MatvecFn = std::function<void(const Vector& in, Vector& out)>;

/// Below this size the dense symmetric eigensolver is used.
inline constexpr Index kDenseEigenCutoff = 64;

struct EigenOptions {
  double tol = 1e-8;            // absolute residual target
  int max_iter = 20000;         // operator applications
  std::uint64_t seed = 0x5eed;  // start vector
  int basis_size = 80;          // Krylov basis before a thick restart
};

/// Extreme eigenpair of a symmetric operator.
///
/// Dense path for n ≤ kDenseEigenCutoff, otherwise thick-restart Lanczos with
/// full reorthogonalization and explicit Rayleigh–Ritz projection. The start
/// vector is drawn from `seed`, so results are reproducible. The returned
/// residual is recomputed with a fresh operator application.
EigResult extreme_eigenpair(const SymOp& op, Extreme which, const EigenOptions& options);
EigResult extreme_eigenpair(const SymOp& op, Extreme which, double tol, int max_iter);
EigResult extreme_eigenpair(Index n, const MatvecFn& apply, Extreme which,
                            const EigenOptions& options);

/// ‖A‖ = max(|λ_min|, |λ_max|).
double spectral_norm(const SymOp& op, double tol, int max_iter = 20000);

}  // namespace bmsync
