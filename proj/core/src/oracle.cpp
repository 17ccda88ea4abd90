#include "bmsync/oracle.hpp"

#include "bmsync/certify.hpp"
#include "bmsync/parallel.hpp"
#include "bmsync/recover.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace bmsync {
namespace {

constexpr std::uint64_t kChunk = 4096;
// optimal_points is a sample; A = I makes every vector optimal.
constexpr std::size_t kMaxOptimalPoints = 4096;

struct Dense {
  Matrix m;
  double norm = 0.0;
};

Dense densify_checked(const SymOp& a, Index cap, const char* what) {
  if (a.size() < 1) throw OracleSizeError(std::string(what) + ": n must be >= 1");
  if (a.size() > cap) {
    throw OracleSizeError(std::string(what) + ": n = " + std::to_string(a.size()) +
                          " exceeds the cap " + std::to_string(cap));
  }
  Dense d;
  d.m = a.densify();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(d.m, Eigen::EigenvaluesOnly);
  d.norm = eig.eigenvalues().cwiseAbs().maxCoeff();
  return d;
}

double scaled_tol(Index n, double norm) {
  return 1e-10 * std::max(static_cast<double>(n) * norm, std::numeric_limits<double>::min());
}

// x for Gray index k: bit b of k ^ (k >> 1) set ⇔ x_{b+1} = −1; x₀ = +1.
Vector gray_vector(std::uint64_t k, Index n) {
  const std::uint64_t gray = k ^ (k >> 1);
  Vector x = Vector::Ones(n);
  for (Index b = 0; b + 1 < n; ++b) {
    if ((gray >> b) & 1U) x(b + 1) = -1.0;
  }
  return x;
}

std::uint64_t space_size(Index n) { return std::uint64_t{1} << (n - 1); }

// Visits every Gray index with its value xᵀMx, chunk by chunk; chunk starts
// recompute Mx from scratch so rounding never accumulates past kChunk flips.
template <class Visit>
void scan_chunk(const Matrix& m, std::uint64_t chunk, Visit&& visit) {
  const Index n = m.rows();
  const std::uint64_t begin = chunk * kChunk;
  const std::uint64_t end = std::min(begin + kChunk, space_size(n));
  Vector x = gray_vector(begin, n);
  Vector mx = m * x;
  double value = x.dot(mx);
  visit(begin, value);
  for (std::uint64_t k = begin + 1; k < end; ++k) {
    const Index pos = static_cast<Index>(std::countr_zero(k)) + 1;
    value += -4.0 * x(pos) * mx(pos) + 4.0 * m(pos, pos);
    mx.noalias() -= (2.0 * x(pos)) * m.col(pos);
    x(pos) = -x(pos);
    visit(k, value);
  }
}

std::uint64_t chunk_count(Index n) { return (space_size(n) + kChunk - 1) / kChunk; }

}  // namespace

OracleResult mle_bruteforce(const SymOp& a, int workers) {
  const Dense dense = densify_checked(a, kMleMaxN, "mle_bruteforce");
  const Index n = a.size();
  const std::uint64_t chunks = chunk_count(n);

  struct Best {
    double value = -std::numeric_limits<double>::infinity();
    std::uint64_t k = 0;
  };
  std::vector<Best> bests(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    Best& best = bests[c];
    scan_chunk(dense.m, c, [&](std::uint64_t k, double value) {
      if (value > best.value) best = Best{value, k};
    });
  });
  Best overall;
  for (const Best& b : bests) {
    if (b.value > overall.value) overall = b;
  }

  OracleResult result;
  result.best_x = gray_vector(overall.k, n);
  result.best_value = result.best_x.dot(dense.m * result.best_x);
  result.scanned = space_size(n);
  result.value_tol = scaled_tol(n, dense.norm);

  // Second pass: collect near-optimal vectors in index order.
  std::vector<std::vector<std::uint64_t>> hits(chunks);
  const double level = result.best_value - 2.0 * result.value_tol;
  parallel_for(chunks, workers, [&](std::size_t c) {
    scan_chunk(dense.m, c, [&](std::uint64_t k, double value) {
      if (value >= level && hits[c].size() < kMaxOptimalPoints) hits[c].push_back(k);
    });
  });
  for (const auto& chunk_hits : hits) {
    for (std::uint64_t k : chunk_hits) {
      if (result.optimal_points.size() >= kMaxOptimalPoints) break;
      Vector x = gray_vector(k, n);
      if (x.dot(dense.m * x) >= result.best_value - result.value_tol) {
        result.optimal_points.push_back(std::move(x));
      }
    }
  }
  return result;
}

std::vector<Vector> enumerate_soc_rank1(const SymOp& a, int workers) {
  const Dense dense = densify_checked(a, kSocMaxN, "enumerate_soc_rank1");
  const Index n = a.size();
  const double tol = scaled_tol(n, dense.norm);
  const std::uint64_t chunks = chunk_count(n);
  std::vector<std::vector<std::uint64_t>> found(chunks);

  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(begin + kChunk, space_size(n));
    for (std::uint64_t k = begin; k < end; ++k) {
      const Vector x = gray_vector(k, n);
      const Vector mx = dense.m * x;
      // H(x) = D_x·S(x)·D_x with D_x = diag(x), so both share a spectrum.
      const Vector d = x.cwiseProduct(mx);
      if ((d - dense.m.diagonal()).minCoeff() < -tol) continue;
      Matrix s = -dense.m;
      s.diagonal() += d;
      const Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues()(0) >= -tol) found[c].push_back(k);
    }
  });

  std::vector<Vector> points;
  for (const auto& chunk_found : found) {
    for (std::uint64_t k : chunk_found) points.push_back(gray_vector(k, n));
  }
  return points;
}

Lemma4Audit lemma4_audit(const SymOp& a, int workers) {
  Lemma4Audit audit;
  audit.mle = mle_bruteforce(a, workers);
  audit.mle.soc_rank1_points = enumerate_soc_rank1(a, workers);
  const Matrix m = a.densify();
  for (const Vector& x : audit.mle.soc_rank1_points) {
    if (x.dot(m * x) < audit.mle.best_value - audit.mle.value_tol) {
      audit.counter_candidates.push_back(x);
    }
  }
  audit.holds = audit.counter_candidates.empty();
  return audit;
}

LemmaReport verify_deterministic_lemmas(const Vector& z, const SymOp& delta,
                                        std::optional<double> gamma, double c,
                                        const CirclePoint& q, double eps,
                                        std::optional<double> sdp_over_n) {
  const Index n = z.size();
  if (delta.size() != n || q.size() != n) throw DimensionError("verify_deterministic_lemmas: size mismatch");
  if (!(c >= 0.0) || !(eps >= 0.0)) throw std::invalid_argument("verify_deterministic_lemmas: need c, eps >= 0");
  if (gamma && !(*gamma >= 0.0)) throw std::invalid_argument("verify_deterministic_lemmas: need gamma >= 0");

  const double nd = static_cast<double>(n);
  const double root_n = std::sqrt(nd);
  const double log_n = std::log(nd);

  LemmaReport r;
  r.n = n;
  r.c = c;
  r.eps = eps;
  r.spec_norm = operator_norm(delta);
  r.inf_norm_signal = delta.apply(z).cwiseAbs().maxCoeff();
  r.gamma_hat = std::max(r.spec_norm / root_n, n > 1 ? r.inf_norm_signal / std::sqrt(nd * log_n) : 0.0);
  r.gamma = gamma.value_or(r.gamma_hat);
  r.zero_diagonal = delta.diagonal().cwiseAbs().maxCoeff() == 0.0;
  const double gc = r.gamma * c;
  const bool norm_ok = r.spec_norm <= r.gamma * root_n;
  const bool inf_ok = r.inf_norm_signal <= r.gamma * std::sqrt(nd * log_n);
  const double corr = correlation(q, z);
  // Conclusions are compared with a round-off margin only.
  constexpr double kSlack = 1e-12;

  r.lemma2.bound = 0.5 - 2.0 * gc - eps / nd;
  r.lemma2.measured = corr * corr;
  if (sdp_over_n) {
    r.lemma2.basis = "sdp";
    r.lemma2.hypothesis = *sdp_over_n <= r.gamma * root_n;
  } else {
    r.lemma2.basis = "spectral-norm surrogate";
    r.lemma2.hypothesis = norm_ok;
  }
  r.lemma2.conclusion = r.lemma2.measured >= r.lemma2.bound - kSlack;

  r.lemma3.basis = "spectral-norm";
  r.lemma3.hypothesis = norm_ok;
  r.lemma3.bound = 1.0 - 8.0 * gc;
  r.lemma3.measured = corr;
  r.lemma3.conclusion = corr >= r.lemma3.bound - kSlack;

  const SymOp a = SymOp::spike_noise(z, delta, c * root_n);
  r.lemma5.basis = "strict complementarity";
  r.lemma5.bound = 1.0 / (1.0 + std::sqrt(log_n));
  r.lemma5.measured = gc;
  r.lemma5.hypothesis = r.zero_diagonal && norm_ok && inf_ok && gc < r.lemma5.bound;
  r.lemma5.conclusion = uniqueness_check(a, z);

  r.theorem.basis = "exact recovery of Q";
  r.theorem.bound = 1.0 / (9.0 + std::sqrt(log_n) + 4.0 * std::sqrt(gc * nd));
  r.theorem.measured = gc;
  r.theorem.hypothesis = r.zero_diagonal && norm_ok && inf_ok && gc < r.theorem.bound;
  r.theorem.conclusion = exact_recovery(q, z);
  return r;
}

namespace {

nlohmann::json signs_json(const Vector& x) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < x.size(); ++i) out.push_back(static_cast<int>(x(i)));
  return out;
}

nlohmann::json to_json(const LemmaCheck& check) {
  return {{"hypothesis", check.hypothesis}, {"conclusion", check.conclusion},
          {"bound", check.bound}, {"measured", check.measured}, {"basis", check.basis}};
}

}  // namespace

nlohmann::json to_json(const OracleResult& result) {
  nlohmann::json optimal = nlohmann::json::array();
  for (const Vector& x : result.optimal_points) optimal.push_back(signs_json(x));
  nlohmann::json soc = nlohmann::json::array();
  for (const Vector& x : result.soc_rank1_points) soc.push_back(signs_json(x));
  return {{"best_x", signs_json(result.best_x)},
          {"best_value", result.best_value},
          {"optimal_points", optimal},
          {"soc_rank1_points", soc},
          {"scanned", result.scanned},
          {"optimal_count", result.optimal_points.size()},
          {"soc_rank1_count", result.soc_rank1_points.size()},
          {"value_tol", result.value_tol}};
}

nlohmann::json to_json(const Lemma4Audit& audit, const SymOp& a) {
  nlohmann::json j{{"mle", to_json(audit.mle)}, {"holds", audit.holds}};
  nlohmann::json counters = nlohmann::json::array();
  for (const Vector& x : audit.counter_candidates) counters.push_back(signs_json(x));
  j["counter_candidates"] = counters;
  if (!audit.holds) {
    // Dump the full instance so a counterexample can be inspected offline.
    const Matrix m = a.densify();
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
      rows.push_back(std::move(row));
    }
    j["matrix"] = rows;
  }
  return j;
}

nlohmann::json to_json(const LemmaReport& report) {
  return {{"n", report.n},
          {"gamma", report.gamma},
          {"gamma_hat", report.gamma_hat},
          {"c", report.c},
          {"eps", report.eps},
          {"spec_norm", report.spec_norm},
          {"inf_norm_signal", report.inf_norm_signal},
          {"zero_diagonal", report.zero_diagonal},
          {"lemma2", to_json(report.lemma2)},
          {"lemma3", to_json(report.lemma3)},
          {"lemma5", to_json(report.lemma5)},
          {"theorem", to_json(report.theorem)}};
}

}  // namespace bmsync
