#pragma once

#include "bmsync/circle.hpp"
#include "bmsync/rng.hpp"
#include "bmsync/symop.hpp"

#include <optional>

namespace bmsync {

/// exact_recovery tolerance is this times n unless given explicitly.
inline constexpr double kExactRecoveryRelTol = 1e-6;

struct RecoveryMetrics {
  double correlation = 0.0;    // ‖Qᵀz‖₂/n
  double overlap = 0.0;        // |⟨ẑ, z⟩|/n for the rounded ẑ
  bool exact = false;          // frobenius_gap ≤ tol
  double frobenius_gap = 0.0;  // ‖QQᵀ − zzᵀ‖_F
};

/// ‖Qᵀz‖₂/n.
double correlation(const CirclePoint& q, const Vector& z);

/// |⟨x, z⟩|/n.
double overlap(const Vector& x, const Vector& z);

/// sign(Qg) for g ~ N(0, I₂); exact zeros map to +1.
Vector round_gaussian(const CirclePoint& q, Rng& rng);

/// ‖QQᵀ − zzᵀ‖_F in O(n) without forming QQᵀ, using a centred expansion that
/// avoids the cancellation of ‖QQᵀ‖_F² − 2‖Qᵀz‖² + n² near exact recovery.
double frobenius_gap(const CirclePoint& q, const Vector& z);

/// frobenius_gap ≤ tol, default tol = 1e-6·n.
bool exact_recovery(const CirclePoint& q, const Vector& z,
                    std::optional<double> tol = std::nullopt);

RecoveryMetrics recovery_metrics(const CirclePoint& q, const Vector& z, Rng& rng,
                                 std::optional<double> tol = std::nullopt);

/// Signs of the top eigenvector of Y with its diagonal removed; zeros map to +1.
Vector spectral_baseline(const SymOp& y);

}  // namespace bmsync
