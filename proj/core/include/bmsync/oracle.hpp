#pragma once

#include "bmsync/circle.hpp"
#include "bmsync/symop.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace bmsync {

inline constexpr Index kMleMaxN = 20;
inline constexpr Index kSocMaxN = 16;

class OracleSizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OracleResult {
  Vector best_x;          // first maximizer in Gray-code order, with x₀ = +1
  double best_value = 0.0;
  std::vector<Vector> optimal_points;    // every x (x₀ = +1) within value_tol of the best
  std::vector<Vector> soc_rank1_points;  // filled by lemma4_audit
  std::uint64_t scanned = 0;
  double value_tol = 0.0;
};

/// max xᵀAx over x ∈ {±1}ⁿ by exhaustive Gray-code scan of the 2ⁿ⁻¹ vectors
/// with x₀ = +1. Values are maintained incrementally and re-anchored every
/// 4096 flips; the winner's value is recomputed from scratch.
OracleResult mle_bruteforce(const SymOp& a, int workers = 1);

/// Every x ∈ {±1}ⁿ (x₀ = +1) with diag((Ax)∘x) − A∘(xxᵀ) ⪰ −1e-10·n‖A‖.
std::vector<Vector> enumerate_soc_rank1(const SymOp& a, int workers = 1);

struct Lemma4Audit {
  OracleResult mle;
  std::vector<Vector> counter_candidates;  // rank-1 second-order points below the optimum
  bool holds = true;
};

/// Checks that every rank-1 second-order critical point is a global maximizer.
Lemma4Audit lemma4_audit(const SymOp& a, int workers = 1);

struct LemmaCheck {
  bool hypothesis = false;
  bool conclusion = false;
  double bound = 0.0;     // right-hand side of the conclusion
  double measured = 0.0;  // left-hand side on the supplied Q
  std::string basis;      // what the hypothesis was evaluated with
};

struct LemmaReport {
  Index n = 0;
  double gamma = 0.0;      // value used in every hypothesis
  double gamma_hat = 0.0;  // max(‖Δ‖/√n, ‖Δz‖∞/√(n log n))
  double c = 0.0;
  double eps = 0.0;
  double spec_norm = 0.0;
  double inf_norm_signal = 0.0;
  bool zero_diagonal = false;
  LemmaCheck lemma2;    // ⟨zzᵀ, QQᵀ⟩/n² ≥ ½ − 2γc − ε/n
  LemmaCheck lemma3;    // ‖Qᵀz‖/n ≥ 1 − 8γc
  LemmaCheck lemma5;    // γc < 1/(1 + √log n) ⇒ zzᵀ is the unique SDP optimum
  LemmaCheck theorem;   // γc < 1/(9 + √log n + 4√(γcn)) ⇒ QQᵀ = zzᵀ
};

/// Evaluates the deterministic correlation and exact-recovery lemmas for
/// A = zzᵀ + σΔ, σ = c√n, on a point Q assumed ε-approximately second-order
/// critical (H(Q) ⪰ −εI). Without `gamma`, γ̂ is used. Without `sdp_over_n`,
/// the correlation lemma's hypothesis is checked through ‖Δ‖ ≥ SDP(Δ)/n.
LemmaReport verify_deterministic_lemmas(const Vector& z, const SymOp& delta,
                                        std::optional<double> gamma, double c,
                                        const CirclePoint& q, double eps,
                                        std::optional<double> sdp_over_n = std::nullopt);

nlohmann::json to_json(const OracleResult& result);
nlohmann::json to_json(const Lemma4Audit& audit, const SymOp& a);
nlohmann::json to_json(const LemmaReport& report);

}  // namespace bmsync
