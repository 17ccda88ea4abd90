#include "bmsync/certify.hpp"
#include "bmsync/models.hpp"
#include "bmsync/recover.hpp"
#include "bmsync/solver.hpp"
#include "bmsync/spectral.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace bmsync;
using bmsync::testing::random_signs;
using bmsync::testing::random_symmetric;
using bmsync::testing::sin_matrix;

namespace {

// Reference values for sin_matrix(n, k): SDP optimum from an interior-point
// solve and the exhaustive MLE, computed outside this library.
constexpr double kSdp10 = 26.7557582093;   // n = 10, k = 0
constexpr double kMle10 = 25.233421764661;
constexpr double kSdp12 = 42.8110796255;   // n = 12, k = 0.5

}  // namespace

TEST(SolverConfigDefaults, ScaleWithN) {
  const SolverConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.grad_tol_for(100), 1e-6);
  EXPECT_DOUBLE_EQ(cfg.hess_tol_for(100), 1e-4);
  EXPECT_EQ(cfg.tcg_max_for(100), 400);
  EXPECT_EQ(cfg.max_outer, 1000);
  EXPECT_GT(cfg.trust_init_for(100), 0.0);
  EXPECT_LE(cfg.trust_init_for(100), cfg.trust_max_for(100));
}

TEST(SolverConfigDefaults, ValidationRejectsNonPositive) {
  SolverConfig cfg;
  cfg.grad_tol = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.hess_tol = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.max_outer = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_NO_THROW(SolverConfig{}.validate());
}

TEST(SolveRank2, NoiselessExactRecoveryAllSeeds) {
  const Index n = 100;
  Rng rng = make_rng(1);
  const Vector z = random_signs(n, rng);
  const SymOp a = SymOp::spike_noise(z, SymOp::identity(n), 0.0);
  for (std::uint64_t s = 0; s < 50; ++s) {
    SolverConfig cfg;
    cfg.seed = s;
    const SolveReport r = solve_rank2(a, cfg);
    EXPECT_EQ(r.status, SolveStatus::converged) << "seed " << s;
    EXPECT_LE(frobenius_gap(r.point, z), 1e-6) << "seed " << s;
  }
}

TEST(SolveRank2, TwoNodeAgreement) {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  const SolveReport r = solve_rank2(SymOp::dense(a), SolverConfig{});
  EXPECT_EQ(r.status, SolveStatus::converged);
  EXPECT_NEAR(r.cost, 2.0, 1e-10);
  EXPECT_NEAR(r.point.rows().row(0).dot(r.point.rows().row(1)), 1.0, 1e-8);
}

TEST(SolveRank2, SandwichedBetweenMleAndNormBound) {
  const SymOp a = SymOp::dense(sin_matrix(10, 0.0));
  const double bound = 10.0 * spectral_norm(a, 1e-12);
  for (std::uint64_t s = 0; s < 10; ++s) {
    SolverConfig cfg;
    cfg.seed = s;
    const SolveReport r = solve_rank2(a, cfg);
    EXPECT_EQ(r.status, SolveStatus::converged);
    EXPECT_LE(r.cost, kSdp10 + 1e-6);
    EXPECT_LE(r.cost, bound);
  }
  // The best of several restarts reaches at least the rank-1 optimum.
  const auto reports = multistart(a, 10, SolverConfig{});
  EXPECT_GE(reports.front().cost, kMle10 - 1e-9);
}

TEST(SolveRank2, ConvergedReportsMeetContractsIndependently) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Z2Instance inst = gen_z2(150, LambdaSnr{3.0}, s);
    SolverConfig cfg;
    cfg.seed = s;
    const SolveReport r = solve_rank2(inst.y, cfg);
    ASSERT_EQ(r.status, SolveStatus::converged);
    EXPECT_LE(r.grad_residual, cfg.grad_tol_for(150));
    EXPECT_GE(r.hess_min_eig, -cfg.hess_tol_for(150));
    const Residuals check = criticality_residuals(inst.y, r.point, 1e-10 * 150);
    EXPECT_LE(check.grad_residual, cfg.grad_tol_for(150) * (1 + 1e-6));
    EXPECT_GE(check.hess_min_eig, -cfg.hess_tol_for(150));
    EXPECT_NEAR(r.cost, cost(inst.y, r.point), 1e-9 * std::abs(r.cost));
  }
}

TEST(SolveRank2, NeverWorseThanItsStart) {
  Rng rng = make_rng(3);
  for (int t = 0; t < 10; ++t) {
    const SymOp a = SymOp::dense(random_symmetric(40, rng));
    const CirclePoint start = random_point(40, rng);
    const SolveReport r = solve_rank2(a, SolverConfig{}, start);
    EXPECT_GE(r.cost, cost(a, start));
  }
}

TEST(SolveRank2, EscapesPlantedStrictSaddle) {
  // At x = z with half the signs flipped, zᵀx = 0, so [x 0] is first-order
  // critical for zzᵀ with H = −(z∘x)(z∘x)ᵀ, whose least eigenvalue is −n.
  const Index n = 60;
  Rng rng = make_rng(4);
  const Vector z = random_signs(n, rng);
  Vector x = z;
  x.head(n / 2) *= -1.0;
  const SymOp a = SymOp::dense(z * z.transpose());
  const CirclePoint saddle = CirclePoint::from_signs(x);
  ASSERT_LE(rgrad(a, saddle).norm(), 1e-12);
  ASSERT_LT(criticality_residuals(a, saddle, 1e-10).hess_min_eig, -1.0);

  const SolveReport r = solve_rank2(a, SolverConfig{}, saddle);
  EXPECT_EQ(r.status, SolveStatus::converged);
  EXPECT_GT(r.cost, cost(a, saddle) + 1.0);
  EXPECT_NEAR(r.cost, double(n * n), 1e-6);
}

TEST(SolveRank2, NonFiniteMatrixIsAnError) {
  Matrix a = Matrix::Zero(4, 4);
  a(0, 1) = a(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve_rank2(SymOp::dense(a), SolverConfig{}), SolverError);
}

TEST(SolveRank2, IterationLimitReturnsBestPoint) {
  const Z2Instance inst = gen_z2(300, LambdaSnr{1.5}, 7);
  SolverConfig cfg;
  cfg.max_outer = 1;
  const SolveReport r = solve_rank2(inst.y, cfg);
  EXPECT_EQ(r.status, SolveStatus::iteration_limit);
  EXPECT_EQ(r.point.size(), 300);
  EXPECT_TRUE(std::isfinite(r.cost));
}

TEST(SolveRank2, InitSizeMismatchThrows) {
  Rng rng = make_rng(5);
  EXPECT_THROW(solve_rank2(SymOp::identity(5), SolverConfig{}, random_point(6, rng)), DimensionError);
}

TEST(SolveRank2, DeterministicPerSeed) {
  const Z2Instance inst = gen_z2(120, LambdaSnr{2.0}, 9);
  SolverConfig cfg;
  cfg.seed = 42;
  const SolveReport r1 = solve_rank2(inst.y, cfg);
  const SolveReport r2 = solve_rank2(inst.y, cfg);
  EXPECT_EQ(r1.point.rows(), r2.point.rows());
  EXPECT_EQ(r1.cost, r2.cost);
  EXPECT_EQ(r1.matvecs, r2.matvecs);
}

TEST(SolveRankp, FullRankOnSpike) {
  const Index n = 12;
  Rng rng = make_rng(6);
  const Vector z = random_signs(n, rng);
  const ObliqueSolveReport r = solve_rankp(SymOp::dense(z * z.transpose()), n, SolverConfig{});
  EXPECT_NEAR(r.cost, double(n * n), 1e-8);
  EXPECT_EQ(r.status, SolveStatus::converged);
}

TEST(SolveRankp, MatchesFrozenSdpValue) {
  const Index n = 12;
  const auto p = static_cast<Index>(std::ceil(std::sqrt(2.0 * n)));
  const SymOp a = SymOp::dense(sin_matrix(n, 0.5));
  for (std::uint64_t s = 0; s < 5; ++s) {
    SolverConfig cfg;
    cfg.seed = s;
    const ObliqueSolveReport r = solve_rankp(a, p, cfg);
    EXPECT_NEAR(r.cost, kSdp12, 1e-4 * n) << "seed " << s;
  }
}

TEST(SolveRankp, RankTwoDelegates) {
  const Z2Instance inst = gen_z2(80, LambdaSnr{2.0}, 11);
  SolverConfig cfg;
  cfg.seed = 5;
  const SolveReport r2 = solve_rank2(inst.y, cfg);
  const ObliqueSolveReport rp = solve_rankp(inst.y, 2, cfg);
  EXPECT_EQ(rp.cost, r2.cost);
  EXPECT_EQ(Matrix(rp.point.rows()), Matrix(r2.point.rows()));
  EXPECT_EQ(rp.outer_iters, r2.outer_iters);
}

TEST(SolveRankp, RejectsBadRank) {
  EXPECT_THROW(solve_rankp(SymOp::identity(4), 1, SolverConfig{}), std::invalid_argument);
  EXPECT_THROW(solve_rankp(SymOp::identity(4), 5, SolverConfig{}), std::invalid_argument);
}

TEST(Multistart, SingleRunEqualsSolve) {
  const Z2Instance inst = gen_z2(90, LambdaSnr{2.5}, 12);
  SolverConfig cfg;
  cfg.seed = 77;
  const auto reports = multistart(inst.y, 1, cfg);
  ASSERT_EQ(reports.size(), 1u);
  const SolveReport direct = solve_rank2(inst.y, cfg);
  EXPECT_EQ(reports[0].cost, direct.cost);
  EXPECT_EQ(reports[0].point.rows(), direct.point.rows());
}

TEST(Multistart, NoiselessAllReachTheOptimum) {
  const Index n = 100;
  const Z2Instance inst = gen_z2(n, SigmaSnr{0.0}, 13);
  const auto reports = multistart(inst.y, 20, SolverConfig{});
  ASSERT_EQ(reports.size(), 20u);
  for (const auto& r : reports) EXPECT_NEAR(r.cost, double(n * n), 1e-6);
}

TEST(Multistart, SortedAndWorkerIndependent) {
  const Z2Instance inst = gen_z2(100, LambdaSnr{1.2}, 14);
  SolverConfig cfg;
  cfg.seed = 3;
  const auto serial = multistart(inst.y, 8, cfg, 1);
  const auto threaded = multistart(inst.y, 8, cfg, 4);
  for (std::size_t k = 1; k < serial.size(); ++k) EXPECT_GE(serial[k - 1].cost, serial[k].cost);
  ASSERT_EQ(serial.size(), threaded.size());
  for (std::size_t k = 0; k < serial.size(); ++k) {
    EXPECT_EQ(serial[k].seed, threaded[k].seed);
    EXPECT_EQ(serial[k].point.rows(), threaded[k].point.rows());
  }
}

TEST(Multistart, StrongSignalCorrelationBound) {
  const Z2Instance inst = gen_z2(300, LambdaSnr{20.0}, 15);
  const auto reports = multistart(inst.y, 20, SolverConfig{});
  for (const auto& r : reports) EXPECT_GE(correlation(r.point, inst.z), 1.0 - 17.6 / 20.0);
}
