#include "bmsync/models.hpp"
#include "bmsync/recover.hpp"
#include "bmsync/solver.hpp"
#include "bmsync/spectral.hpp"
#include "bmsync/tails.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace bmsync;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "bmsync_models_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(GenZ2, NoiselessEqualsSpike) {
  const Z2Instance inst = gen_z2(40, SigmaSnr{0.0}, 1);
  Rng rng = make_rng(1);
  const Vector v = standard_normal(40, rng);
  EXPECT_EQ(inst.y.apply(v), Vector(inst.z * inst.z.dot(v)));
  EXPECT_TRUE(std::isinf(inst.lambda));
}

TEST(GenZ2, LambdaSigmaConversion) {
  const Z2Instance inst = gen_z2(1600, LambdaSnr{8.0}, 2);
  EXPECT_DOUBLE_EQ(inst.sigma, 5.0);
  EXPECT_DOUBLE_EQ(inst.lambda * inst.sigma, 40.0);
  // n = 6400, λ = 8 gives σ = 10 by the same formula.
  EXPECT_DOUBLE_EQ(std::sqrt(6400.0) / 8.0, 10.0);
  EXPECT_NEAR(gen_z2(64, SigmaSnr{2.0}, 3).lambda, 4.0, 1e-15);
}

TEST(GenZ2, NoiseStructure) {
  const Z2Instance inst = gen_z2(30, SigmaSnr{1.5}, 4);
  const Matrix w = inst.noise.densify();
  EXPECT_EQ((w - w.transpose()).norm(), 0.0);
  EXPECT_EQ(w.diagonal().norm(), 0.0);
  EXPECT_EQ(inst.z.cwiseAbs(), Vector::Ones(30));
  const Matrix y = inst.z * inst.z.transpose() + 1.5 * w;
  EXPECT_LE((inst.y.densify() - y).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(GenZ2, EntryVarianceMatchesSigma) {
  const double sigma = 2.0;
  const Index n = 450;  // ~10⁵ off-diagonal pairs
  const Z2Instance inst = gen_z2(n, SigmaSnr{sigma}, 5);
  const Matrix y = inst.y.densify();
  double sum = 0, sum2 = 0;
  long count = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double r = y(i, j) - inst.z(i) * inst.z(j);
      sum += r;
      sum2 += r * r;
      ++count;
    }
  }
  const double mean = sum / double(count);
  const double var = sum2 / double(count) - mean * mean;
  EXPECT_NEAR(var, sigma * sigma, 0.03 * sigma * sigma);
}

TEST(GenZ2, LabelsSymmetric) {
  double total = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) total += gen_z2(4, SigmaSnr{1.0}, derive_seed(6, {std::uint64_t(t)})).z.sum();
  // Each label is ±1 with probability ½: the mean of 4000 labels is within 4 standard errors of 0.
  EXPECT_LE(std::abs(total / (4.0 * trials)), 4.0 / std::sqrt(4.0 * trials));
}

TEST(GenZ2, DeterministicAndValidated) {
  const Z2Instance a = gen_z2(50, LambdaSnr{3.0}, 7);
  const Z2Instance b = gen_z2(50, LambdaSnr{3.0}, 7);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.noise.densify(), b.noise.densify());
  EXPECT_NE(gen_z2(50, LambdaSnr{3.0}, 8).z, a.z);
  EXPECT_THROW(gen_z2(0, SigmaSnr{1.0}, 0), std::invalid_argument);
  EXPECT_THROW(gen_z2(5, SigmaSnr{-1.0}, 0), std::invalid_argument);
  EXPECT_THROW(gen_z2(5, LambdaSnr{0.0}, 0), std::invalid_argument);
}

TEST(GenSbm, TwoCliquesAlignWithinCommunities) {
  const SbmInstance inst = gen_sbm(40, ProbParams{1.0, 0.0}, 1);
  const SolveReport r = solve_rank2(inst.centered, SolverConfig{});
  EXPECT_EQ(r.status, SolveStatus::converged);
  EXPECT_TRUE(exact_recovery(r.point, inst.g));
  EXPECT_NEAR(r.cost, cost(inst.centered, CirclePoint::from_signs(inst.g)), 1e-8);
}

TEST(GenSbm, LambdaOfDegreeParameters) {
  const SbmInstance inst = gen_sbm(1000, DegreeParams{200.0, 2.0}, 2);
  EXPECT_NEAR(inst.lambda_ab, 198.0 / std::sqrt(404.0), 1e-12);
  EXPECT_NEAR(inst.lambda_ab, 9.850868183078893, 1e-12);
  EXPECT_GT(inst.lambda_ab, 8.0);
  EXPECT_DOUBLE_EQ(inst.p, 0.2);
  EXPECT_DOUBLE_EQ(inst.q, 0.002);
}

TEST(GenSbm, BalancedLabelsAndSymmetricAdjacency) {
  const SbmInstance inst = gen_sbm(60, DegreeParams{20.0, 5.0}, 3);
  EXPECT_EQ(inst.g.sum(), 0.0);
  EXPECT_EQ(inst.g.cwiseAbs(), Vector::Ones(60));
  const Matrix a = inst.adjacency.densify();
  EXPECT_EQ((a - a.transpose()).norm(), 0.0);
  EXPECT_TRUE(((a.array() == 0.0) || (a.array() == 1.0)).all());
  const Matrix centered = a - (inst.p + inst.q) / 2.0 * Matrix::Ones(60, 60);
  EXPECT_LE((inst.centered.densify() - centered).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(GenSbm, EdgeDensities) {
  const Index n = 2000;
  const SbmInstance inst = gen_sbm(n, ProbParams{0.05, 0.01}, 4);
  const SparseMatrix& adj = std::get<SymOp::Sparse>(inst.adjacency.repr().value).values;
  double within = 0, across = 0;
  for (Index k = 0; k < adj.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(adj, k); it; ++it) {
      if (it.row() >= it.col()) continue;
      (inst.g(it.row()) == inst.g(it.col()) ? within : across) += it.value();
    }
  }
  const double pairs_within = 2.0 * (n / 2.0) * (n / 2.0 - 1) / 2.0;
  const double pairs_across = (n / 2.0) * (n / 2.0);
  EXPECT_NEAR(within / pairs_within, 0.05, 0.03 * 0.05);
  EXPECT_NEAR(across / pairs_across, 0.01, 0.03 * 0.01 * 3);
}

TEST(GenSbm, DiagonalSampled) {
  const SbmInstance inst = gen_sbm(400, ProbParams{0.5, 0.1}, 5);
  const double loops = inst.adjacency.diagonal().sum();
  EXPECT_GT(loops, 150.0);
  EXPECT_LT(loops, 250.0);
}

TEST(GenSbm, InvalidParameters) {
  EXPECT_THROW(gen_sbm(11, ProbParams{0.5, 0.1}, 0), std::invalid_argument);
  EXPECT_THROW(gen_sbm(10, ProbParams{0.1, 0.1}, 0), std::invalid_argument);
  EXPECT_THROW(gen_sbm(10, ProbParams{0.1, 0.5}, 0), std::invalid_argument);
  EXPECT_THROW(gen_sbm(10, ProbParams{1.5, 0.1}, 0), std::invalid_argument);
  EXPECT_THROW(gen_sbm(10, DegreeParams{20.0, 1.0}, 0), std::invalid_argument);
}

TEST(NoiseDecomposition, DenseIdentity) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Index n = 8;
    const SbmInstance inst = gen_sbm(n, ProbParams{0.7, 0.2}, s);
    const NoiseDecomposition dec = noise_decomposition(inst);
    const double p = inst.p, q = inst.q;
    const double scale = std::sqrt(2.0 / ((p + q) * n));
    EXPECT_DOUBLE_EQ(dec.scale, scale);
    const Matrix a = inst.adjacency.densify();
    const Vector& g = inst.g;
    // Independently built E: off-diagonal s(A_ij − p) within, s(A_ij − q) across.
    Matrix e = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (i != j) e(i, j) = scale * (a(i, j) - (g(i) == g(j) ? p : q));
      }
    }
    EXPECT_LE((dec.e.densify() - e).lpNorm<Eigen::Infinity>(), 1e-12);
    const Matrix centered = a - (p + q) / 2.0 * Matrix::Ones(n, n);
    const Matrix lhs = scale * centered - Matrix(dec.d.asDiagonal());
    const Matrix rhs = dec.lambda / double(n) * g * g.transpose() + e;
    EXPECT_LE((lhs - rhs).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(NoiseDecomposition, CentredEntriesAndDegree) {
  const SbmInstance inst = gen_sbm(600, DegreeParams{30.0, 10.0}, 6);
  const NoiseDecomposition dec = noise_decomposition(inst);
  EXPECT_DOUBLE_EQ(dec.degree, 20.0);
  EXPECT_LE(dec.e.diagonal().lpNorm<Eigen::Infinity>(), 1e-12);
  const Vector ones = Vector::Ones(600);
  const double mean = ones.dot(dec.e.apply(ones)) / (600.0 * 599.0);
  // Entry standard deviation is about s·√p ≈ 0.06; the mean of ~3.6·10⁵ entries is far tighter.
  EXPECT_LE(std::abs(mean), 1e-3);
}

TEST(LambdaParams, Examples) {
  EXPECT_EQ(lambda_params(0.1, 0.1, 100).lambda_ab, 0.0);
  EXPECT_NEAR(lambda_params(0.018, 0.002, 1000).lambda_ab, 2.5298221281347035, 1e-12);
  for (const auto& [a, b, n] : {std::tuple{200.0, 2.0, 1000}, std::tuple{18.0, 2.0, 5000}, std::tuple{7.0, 3.0, 64}}) {
    const LambdaParams l = lambda_params(a / n, b / n, n);
    EXPECT_NEAR(l.lambda_tilde, l.lambda_ab, 1e-12 * (1.0 + l.lambda_ab));
    EXPECT_NEAR(l.lambda_ab, (a - b) / std::sqrt(2 * (a + b)), 1e-12);
  }
}

TEST(SummarizeNoise, Z2Fields) {
  const Z2Instance inst = gen_z2(200, SigmaSnr{3.0}, 7);
  const NoiseSummary s = summarize_noise(inst);
  const Matrix w = inst.noise.densify();
  EXPECT_NEAR(s.inf_norm_signal, (w * inst.z).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(s.spec_norm, spectral_norm(inst.noise, 1e-10), 1e-6);
  EXPECT_DOUBLE_EQ(s.c, 3.0 / std::sqrt(200.0));
  EXPECT_DOUBLE_EQ(s.gamma_hat, gamma_hat(s.spec_norm, s.inf_norm_signal, 200));
  EXPECT_DOUBLE_EQ(gamma_hat(20.0, 1.0, 100), 2.0);
  EXPECT_DOUBLE_EQ(gamma_hat(1.0, 10.0 * std::sqrt(std::log(100.0)) * 3.0, 100), 3.0);
  EXPECT_FALSE(s.sdp_over_n.has_value());
  const NoiseSummary with = summarize_noise(gen_z2(40, SigmaSnr{1.0}, 7), true);
  ASSERT_TRUE(with.sdp_over_n.has_value());
  EXPECT_LE(*with.sdp_over_n, with.spec_norm * (1 + 1e-9));
}

TEST(SummarizeNoise, SbmUsesScaledNoise) {
  const SbmInstance inst = gen_sbm(300, DegreeParams{40.0, 10.0}, 8);
  const NoiseSummary s = summarize_noise(inst);
  const NoiseDecomposition dec = noise_decomposition(inst);
  EXPECT_NEAR(s.c, 1.0 / dec.lambda, 1e-14);
  EXPECT_NEAR(s.spec_norm, std::sqrt(300.0) * spectral_norm(dec.e, 1e-10), 1e-5 * s.spec_norm);
}

TEST(InstanceIo, Z2RoundTrip) {
  const Z2Instance inst = gen_z2(30, SigmaSnr{2.0}, 9);
  const auto path = temp_path("z2.txt");
  write_instance(path, inst);
  EXPECT_TRUE(std::filesystem::exists(sidecar_path(path)));
  const Z2Instance back = read_z2_instance(path);
  EXPECT_EQ(back.z, inst.z);
  EXPECT_EQ(back.sigma, inst.sigma);
  EXPECT_EQ(back.seed, inst.seed);
  EXPECT_EQ(back.y.densify(), inst.y.densify());
  EXPECT_THROW(read_sbm_instance(path), std::exception);
}

TEST(InstanceIo, SbmRoundTrip) {
  const SbmInstance inst = gen_sbm(100, DegreeParams{10.0, 2.0}, 10);
  const auto path = temp_path("sbm.txt");
  write_instance(path, inst);
  const SbmInstance back = read_sbm_instance(path);
  EXPECT_EQ(back.g, inst.g);
  EXPECT_EQ(back.p, inst.p);
  EXPECT_EQ(back.adjacency.densify(), inst.adjacency.densify());
  EXPECT_EQ(back.centered.densify(), inst.centered.densify());
}

TEST(WignerTails, BoundColumns) {
  const WignerTailTable t = tail_check_wigner(50, 5, {0.0, 4.0}, 11);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(t.rows[0].bound_norm, 1.0);
  EXPECT_LE(t.rows[0].freq_norm, 1.0);
  EXPECT_NEAR(t.rows[1].bound_norm, std::exp(-4.0), 1e-15);
  EXPECT_NEAR(t.rows[1].bound_norm, 0.0183, 1e-4);
  EXPECT_NEAR(t.rows[1].bound_inf, std::exp(-2.0), 1e-15);
  EXPECT_EQ(t.norms.size(), 5u);
}

TEST(WignerTails, NormExceedanceBelowBound) {
  const WignerTailTable t = tail_check_wigner(300, 200, {2.0, 4.0, 6.0}, 12, 2);
  for (const auto& row : t.rows) EXPECT_LE(row.freq_norm, row.bound_norm) << "t=" << row.t;
  const WignerTailTable again = tail_check_wigner(300, 200, {2.0, 4.0, 6.0}, 12, 1);
  EXPECT_EQ(again.norms, t.norms);
}

TEST(SbmTails, MedianSpectralNormShape) {
  const SbmTailTable t = tail_check_sbm(1000, 30.0, 10.0, 50, 13, false);
  EXPECT_DOUBLE_EQ(t.d, 20.0);
  EXPECT_EQ(t.trials.size(), 50u);
  EXPECT_LE(t.e_norm.median, 3.0 + 3.0 * std::sqrt(std::log(1000.0) / 20.0));
  EXPECT_LE(t.e_norm.min, t.e_norm.median);
  EXPECT_LE(t.e_norm.median, t.e_norm.max);
}

TEST(SbmTails, SdpOfNoiseBracketed) {
  const SbmTailTable t = tail_check_sbm(200, 30.0, 10.0, 4, 14, true);
  for (const auto& trial : t.trials) {
    ASSERT_TRUE(trial.error.empty()) << trial.error;
    ASSERT_TRUE(trial.sdp_lower && trial.sdp_upper);
    EXPECT_GE(*trial.sdp_lower, 0.0);  // X = I is feasible and diag(E) = 0
    EXPECT_LE(*trial.sdp_lower, *trial.sdp_upper);
    EXPECT_LE(*trial.sdp_upper, trial.e_norm * (1 + 1e-9));
  }
  EXPECT_TRUE(t.c_sdp.has_value());
}

TEST(Quantiles, Basic) {
  const Quantiles q = quantiles({5, 1, 4, 2, 3});
  EXPECT_EQ(q.min, 1.0);
  EXPECT_EQ(q.median, 3.0);
  EXPECT_EQ(q.max, 5.0);
  EXPECT_GE(q.q90, 4.0);
}
