#pragma once

#include "bmsync/circle.hpp"
#include "bmsync/solver.hpp"
#include "bmsync/symop.hpp"

#include <optional>
#include <string_view>

namespace bmsync {

/// Relative tolerance: thresholds are tol·n·‖A‖.
inline constexpr double kDefaultCertifyTol = 1e-9;

/// σ₂/σ₁ below this makes Q rank one. The single arbiter of rank deficiency.
inline constexpr double kRankThreshold = 1e-8;

enum class Verdict {
  second_order_critical,
  rank_deficient_global,
  global_unique_ground_truth,
  inconclusive,
};
std::string_view to_string(Verdict verdict);
std::optional<Verdict> parse_verdict(std::string_view text);

struct Residuals {
  double grad_residual = 0.0;  // ‖(ddiag(AQQᵀ) − A)Q‖_F
  double hess_min_eig = 0.0;   // λ_min(ddiag(AQQᵀ) − A∘(QQᵀ))
};

/// First- and second-order residuals, computed directly from A and Q (no
/// solver code involved). `eig_tol` is the absolute eigen-residual target.
Residuals criticality_residuals(const SymOp& a, const CirclePoint& q, double eig_tol);

/// S(Q) = ddiag(AQQᵀ) − A for any Q with unit rows (rank 2 or p).
SymOp dual_matrix(const SymOp& a, const Matrix& q_rows);

/// ‖A‖ with residual target rel_tol·‖A‖.
double operator_norm(const SymOp& a, double rel_tol = 1e-10);

struct CertificateReport {
  double grad_residual = 0.0;
  double hess_min_eig = 0.0;
  double s_min_eig = 0.0;  // λ_min(S(Q))
  int q_rank = 2;
  Verdict verdict = Verdict::inconclusive;
  double threshold = 0.0;  // tol·n·‖A‖ used for every test
  double norm_a = 0.0;
};

/// Certificate for a rank-2 point.
///
/// Second-order critical and rank one ⇒ rank-deficient-global: such a Q is a
/// global optimum, and S(Q) ⪰ 0 certifies it independently over the SDP. With a
/// ground truth supplied, a rank-one global point with QQᵀ = zzᵀ whose S(z) also
/// passes uniqueness_check is reported as global-unique-ground-truth.
CertificateReport dual_certificate(const SymOp& a, const CirclePoint& q,
                                   double tol = kDefaultCertifyTol,
                                   const Vector* ground_truth = nullptr);
/// Same, reusing a known ‖A‖.
CertificateReport dual_certificate(const SymOp& a, const CirclePoint& q, double tol,
                                   double norm_a, const Vector* ground_truth);

struct UniquenessReport {
  double sz_norm = 0.0;      // ‖S(z)z‖
  double s_min_eig = 0.0;    // λ_min(S(z))
  double s_second_eig = 0.0; // λ_min(S(z)) restricted to z⊥
  double threshold = 0.0;
  bool unique = false;
};

/// Strict complementarity at zzᵀ: S(z)z ≈ 0, S(z) ⪰ 0 and rank(S(z)) = n − 1.
/// True means zzᵀ is the unique SDP optimum.
bool uniqueness_check(const SymOp& a, const Vector& z, double tol = kDefaultCertifyTol);
UniquenessReport uniqueness_report(const SymOp& a, const Vector& z, double tol, double norm_a);

/// Weak-duality bound from any feasible Q: SDP(A) ≤ Tr(QᵀAQ) + n·max(0, −λ_min(S(Q))),
/// capped by n‖A‖ but never below Tr(QᵀAQ) itself.
double sdp_upper_bound(const SymOp& a, const Matrix& q_rows, double norm_a);

struct SdpEstimate {
  double lower = 0.0;
  double upper = 0.0;
  double norm_bound = 0.0;  // n‖M‖
  Index final_rank = 0;     // last staircase level
  bool certified = false;   // upper − lower within the certificate threshold
};

/// Staircase estimate of SDP(M) = max Tr(MX), X ⪰ 0, diag(X) = 𝟏.
///
/// lower: best cost over rank-p solves, p = 2, 3, … up to ⌈√(2n)⌉ + 1, escalating
/// while the second-order point stays full rank. upper: the smaller of n‖M‖ and
/// the duality-gap bound. Solver failures fall back to upper = n‖M‖.
SdpEstimate sdp_value_estimate(const SymOp& m, const SolverConfig& config);

}  // namespace bmsync
