#include "bmsync/models.hpp"

#include "bmsync/certify.hpp"
#include "bmsync/matrix_io.hpp"
#include "bmsync/rng.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace bmsync {
namespace {

Vector random_signs(Index n, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  Vector z(n);
  for (Index i = 0; i < n; ++i) z(i) = coin(rng) ? 1.0 : -1.0;
  return z;
}

// Uniform over balanced assignments: Fisher–Yates on n/2 (+1) and n/2 (−1).
Vector balanced_signs(Index n, Rng& rng) {
  Vector g(n);
  for (Index i = 0; i < n; ++i) g(i) = i < n / 2 ? 1.0 : -1.0;
  for (Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(g(i), g(pick(rng)));
  }
  return g;
}

const SparseMatrix& adjacency_matrix(const SymOp& adjacency) {
  return std::get<SymOp::Sparse>(adjacency.repr().value).values;
}

nlohmann::json labels_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(static_cast<int>(v(i)));
  return out;
}

Vector labels_from_json(const nlohmann::json& j, Index n) {
  if (!j.is_array() || static_cast<Index>(j.size()) != n) {
    throw FormatError("instance sidecar: labels must be a list of length n");
  }
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    const int s = j.at(static_cast<std::size_t>(i)).get<int>();
    if (s != 1 && s != -1) throw FormatError("instance sidecar: labels must be +1 or -1");
    v(i) = s;
  }
  return v;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

double log_or_one(Index n) {
  // log n vanishes at n = 1; the normalization is then meaningless but finite.
  return n > 1 ? std::log(static_cast<double>(n)) : 1.0;
}

}  // namespace

Z2Instance gen_z2(Index n, Snr snr, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_z2: n must be >= 1");
  const double root_n = std::sqrt(static_cast<double>(n));
  double sigma = 0.0;
  double lambda = 0.0;
  if (const auto* s = std::get_if<SigmaSnr>(&snr)) {
    if (!(s->value >= 0.0) || !std::isfinite(s->value)) throw std::invalid_argument("gen_z2: sigma must be >= 0");
    sigma = s->value;
    lambda = sigma == 0.0 ? std::numeric_limits<double>::infinity() : root_n / sigma;
  } else {
    const double l = std::get<LambdaSnr>(snr).value;
    if (!(l > 0.0)) throw std::invalid_argument("gen_z2: lambda must be > 0");
    lambda = l;
    sigma = std::isinf(l) ? 0.0 : root_n / l;
  }

  Rng rng = make_rng(seed);
  Vector z = random_signs(n, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix w = Matrix::Zero(n, n);
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      w(i, j) = normal(rng);
      w(j, i) = w(i, j);
    }
  }
  SymOp noise = SymOp::dense(std::move(w));
  SymOp y = SymOp::spike_noise(z, noise, sigma);
  return Z2Instance{std::move(z), std::move(noise), std::move(y), sigma, lambda, seed};
}

SbmInstance gen_sbm(Index n, SbmParams params, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("gen_sbm: n must be even and >= 2");
  const double nd = static_cast<double>(n);
  double p = 0.0;
  double q = 0.0;
  if (const auto* pq = std::get_if<ProbParams>(&params)) {
    p = pq->p;
    q = pq->q;
  } else {
    const auto& ab = std::get<DegreeParams>(params);
    p = ab.a / nd;
    q = ab.b / nd;
  }
  if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("gen_sbm: probabilities must lie in [0, 1]");
  }
  if (!(p > q)) throw std::invalid_argument("gen_sbm: need p > q");

  Rng rng = make_rng(seed);
  Vector g = balanced_signs(n, rng);
  std::bernoulli_distribution within(p);
  std::bernoulli_distribution across(q);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(nd * nd * (p + q) / 2.0 + nd));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const bool edge = g(i) == g(j) ? within(rng) : across(rng);
      if (!edge) continue;
      entries.emplace_back(i, j, 1.0);
      if (i != j) entries.emplace_back(j, i, 1.0);
    }
  }
  SparseMatrix adj(n, n);
  adj.setFromTriplets(entries.begin(), entries.end());
  adj.makeCompressed();

  SymOp centered = SymOp::centered_adjacency(adj, (p + q) / 2.0);
  return SbmInstance{std::move(g), SymOp::sparse(std::move(adj)), std::move(centered), p, q,
                     p * nd, q * nd, lambda_params(p, q, n).lambda_ab, seed};
}

LambdaParams lambda_params(double p, double q, Index n) {
  if (!(q >= 0.0 && p >= q && p + q > 0.0)) throw std::invalid_argument("lambda_params: need p >= q >= 0, p + q > 0");
  if (n < 1) throw std::invalid_argument("lambda_params: n must be >= 1");
  const double nd = static_cast<double>(n);
  const double a = p * nd;
  const double b = q * nd;
  return LambdaParams{(a - b) / std::sqrt(2.0 * (a + b)),
                      (p - q) / std::sqrt(2.0 * (p + q)) * std::sqrt(nd)};
}

NoiseDecomposition noise_decomposition(const SbmInstance& inst) {
  const Index n = inst.g.size();
  const double nd = static_cast<double>(n);
  const double s = std::sqrt(2.0 / ((inst.p + inst.q) * nd));
  // diag of A♮ − ((p−q)/2)ggᵀ is A_ii − p; that remainder becomes D.
  const Vector remainder = (adjacency_matrix(inst.adjacency).diagonal().array() - inst.p).matrix();
  Vector d = s * remainder;
  std::vector<std::pair<double, Vector>> rank_one{
      {-s * (inst.p + inst.q) / 2.0, Vector::Ones(n)},
      {-s * (inst.p - inst.q) / 2.0, inst.g},
  };
  SymOp e = SymOp::low_rank_update(inst.adjacency, s, -d, std::move(rank_one));
  return NoiseDecomposition{std::move(e), std::move(d), s, (inst.a + inst.b) / 2.0,
                            lambda_params(inst.p, inst.q, n).lambda_tilde};
}

double gamma_hat(double spec_norm, double inf_norm_signal, Index n) {
  const double nd = static_cast<double>(n);
  return std::max(spec_norm / std::sqrt(nd), inf_norm_signal / std::sqrt(nd * log_or_one(n)));
}

NoiseSummary summarize_noise(const Z2Instance& inst, bool with_sdp, const SolverConfig& config) {
  const Index n = inst.z.size();
  NoiseSummary out;
  out.spec_norm = operator_norm(inst.noise);
  out.inf_norm_signal = inst.noise.apply(inst.z).cwiseAbs().maxCoeff();
  out.gamma_hat = gamma_hat(out.spec_norm, out.inf_norm_signal, n);
  out.c = inst.sigma / std::sqrt(static_cast<double>(n));
  if (with_sdp) {
    out.sdp_over_n = sdp_value_estimate(inst.noise, config).upper / static_cast<double>(n);
  }
  return out;
}

NoiseSummary summarize_noise(const SbmInstance& inst, bool with_sdp, const SolverConfig& config) {
  const Index n = inst.g.size();
  const double root_n = std::sqrt(static_cast<double>(n));
  const NoiseDecomposition dec = noise_decomposition(inst);
  NoiseSummary out;
  out.spec_norm = root_n * operator_norm(dec.e);
  out.inf_norm_signal = root_n * dec.e.apply(inst.g).cwiseAbs().maxCoeff();
  out.gamma_hat = gamma_hat(out.spec_norm, out.inf_norm_signal, n);
  out.c = dec.lambda > 0.0 ? 1.0 / dec.lambda : std::numeric_limits<double>::infinity();
  if (with_sdp) {
    out.sdp_over_n = root_n * sdp_value_estimate(dec.e, config).upper / static_cast<double>(n);
  }
  return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path out = path;
  out += ".json";
  return out;
}

void write_instance(const std::filesystem::path& path, const Z2Instance& inst) {
  write_coordinate(path, inst.noise);
  nlohmann::json j;
  j["model"] = "z2";
  j["matrix"] = "noise";
  j["n"] = inst.z.size();
  j["sigma"] = inst.sigma;
  j["lambda"] = std::isinf(inst.lambda) ? nlohmann::json(nullptr) : nlohmann::json(inst.lambda);
  j["seed"] = inst.seed;
  j["labels"] = labels_json(inst.z);
  write_json(sidecar_path(path), j);
}

void write_instance(const std::filesystem::path& path, const SbmInstance& inst) {
  write_coordinate(path, inst.adjacency);
  nlohmann::json j;
  j["model"] = "sbm";
  j["matrix"] = "adjacency";
  j["n"] = inst.g.size();
  j["p"] = inst.p;
  j["q"] = inst.q;
  j["a"] = inst.a;
  j["b"] = inst.b;
  j["lambda_ab"] = inst.lambda_ab;
  j["seed"] = inst.seed;
  j["labels"] = labels_json(inst.g);
  write_json(sidecar_path(path), j);
}

Z2Instance read_z2_instance(const std::filesystem::path& path) {
  const nlohmann::json j = read_json(sidecar_path(path));
  try {
    if (j.at("model") != "z2") throw FormatError(path.string() + ": sidecar is not a z2 instance");
    SymOp w = read_coordinate(path);
    const Index n = j.at("n").get<Index>();
    if (w.size() != n) throw FormatError(path.string() + ": matrix size disagrees with sidecar");
    // Dense storage keeps matvecs identical to the generated instance.
    if (!std::holds_alternative<SymOp::Dense>(w.repr().value)) w = SymOp::dense(w.densify());
    Vector z = labels_from_json(j.at("labels"), n);
    const double sigma = j.at("sigma").get<double>();
    const double lambda = j.at("lambda").is_null() ? std::numeric_limits<double>::infinity()
                                                   : j.at("lambda").get<double>();
    SymOp y = SymOp::spike_noise(z, w, sigma);
    return Z2Instance{std::move(z), std::move(w), std::move(y), sigma, lambda,
                      j.at("seed").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

SbmInstance read_sbm_instance(const std::filesystem::path& path) {
  const nlohmann::json j = read_json(sidecar_path(path));
  try {
    if (j.at("model") != "sbm") throw FormatError(path.string() + ": sidecar is not an sbm instance");
    const SymOp read = read_coordinate(path);
    const Index n = j.at("n").get<Index>();
    if (read.size() != n) throw FormatError(path.string() + ": matrix size disagrees with sidecar");
    SparseMatrix adj = std::holds_alternative<SymOp::Sparse>(read.repr().value)
                           ? std::get<SymOp::Sparse>(read.repr().value).values
                           : SparseMatrix(read.densify().sparseView());
    adj.makeCompressed();
    const double p = j.at("p").get<double>();
    const double q = j.at("q").get<double>();
    SymOp centered = SymOp::centered_adjacency(adj, (p + q) / 2.0);
    return SbmInstance{labels_from_json(j.at("labels"), n), SymOp::sparse(std::move(adj)),
                       std::move(centered), p, q, j.at("a").get<double>(), j.at("b").get<double>(),
                       j.at("lambda_ab").get<double>(), j.at("seed").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

nlohmann::json to_json(const NoiseSummary& summary) {
  nlohmann::json j;
  j["spec_norm"] = summary.spec_norm;
  j["inf_norm_signal"] = summary.inf_norm_signal;
  j["sdp_over_n"] = summary.sdp_over_n ? nlohmann::json(*summary.sdp_over_n) : nlohmann::json(nullptr);
  j["gamma_hat"] = summary.gamma_hat;
  j["c"] = summary.c;
  return j;
}

}  // namespace bmsync
