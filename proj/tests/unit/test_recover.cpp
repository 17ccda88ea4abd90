#include "bmsync/models.hpp"
#include "bmsync/recover.hpp"
#include "bmsync/serialize.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace bmsync;
using bmsync::testing::random_signs;

namespace {

RowMatrix2 rotation(double angle, bool reflect) {
  RowMatrix2 r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  if (reflect) r.col(1) *= -1.0;
  return r;
}

double dense_gap(const CirclePoint& q, const Vector& z) {
  const Matrix qm = q.rows();
  return (qm * qm.transpose() - z * z.transpose()).norm();
}

}  // namespace

TEST(Correlation, PlantedPointIsOne) {
  Rng rng = make_rng(1);
  const Vector z = random_signs(33, rng);
  EXPECT_DOUBLE_EQ(correlation(CirclePoint::from_signs(z), z), 1.0);
}

TEST(Correlation, TwoNodeExample) {
  RowMatrix2 rows(2, 2);
  rows << 1, 0, 0, 1;
  EXPECT_NEAR(correlation(CirclePoint(rows), Vector::Ones(2)), std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(Correlation, InnerProductIdentityAndInvariances) {
  Rng rng = make_rng(2);
  for (int t = 0; t < 20; ++t) {
    const Index n = 25;
    const Vector z = random_signs(n, rng);
    const CirclePoint q = random_point(n, rng);
    const Matrix qm = q.rows();
    const double inner = (qm * qm.transpose()).cwiseProduct(z * z.transpose()).sum();
    const double c = correlation(q, z);
    EXPECT_NEAR(c, std::sqrt(inner) / n, 1e-12);
    EXPECT_LE(c, 1.0 + 1e-12);
    EXPECT_EQ(correlation(q, -z), c);
    const CirclePoint rotated(q.rows() * rotation(0.3 * t, t % 2 == 1));
    EXPECT_NEAR(correlation(rotated, z), c, 1e-12);
  }
}

TEST(Overlap, Basics) {
  const Vector z = (Vector(4) << 1, -1, 1, -1).finished();
  EXPECT_EQ(overlap(z, z), 1.0);
  EXPECT_EQ(overlap(-z, z), 1.0);
  EXPECT_EQ(overlap((Vector(4) << 1, 1, 1, 1).finished(), z), 0.0);
}

TEST(RoundGaussian, PlantedPointRoundsToTruth) {
  Rng rng = make_rng(3);
  const Vector z = random_signs(50, rng);
  const CirclePoint q(CirclePoint::from_signs(z).rows() * rotation(1.1, false));
  for (int t = 0; t < 20; ++t) {
    const Vector x = round_gaussian(q, rng);
    EXPECT_EQ(overlap(x, z), 1.0);
  }
}

TEST(RoundGaussian, SignsAndDeterminism) {
  Rng rng = make_rng(4);
  const CirclePoint q = random_point(100, rng);
  Rng r1 = make_rng(9), r2 = make_rng(9);
  const Vector x1 = round_gaussian(q, r1);
  EXPECT_EQ(x1, round_gaussian(q, r2));
  EXPECT_EQ(x1.cwiseAbs(), Vector::Ones(100));
}

TEST(RoundGaussian, ProjectionMoments) {
  // E‖Qg‖² = ‖Q‖_F² = n and E⟨z, Qg⟩² = ‖Qᵀz‖², g ~ N(0, I₂).
  Rng rng = make_rng(5);
  const Index n = 60;
  const Vector z = random_signs(n, rng);
  const CirclePoint q = random_point(n, rng);
  const Matrix qm = q.rows();
  double m1 = 0, m2 = 0;
  const int samples = 20000;
  for (int s = 0; s < samples; ++s) {
    const Vector g = standard_normal(2, rng);
    const Vector qg = qm * g;
    m1 += qg.squaredNorm();
    m2 += std::pow(z.dot(qg), 2);
  }
  EXPECT_NEAR(m1 / samples, double(n), 0.05 * n);
  const double target = (qm.transpose() * z).squaredNorm();
  EXPECT_NEAR(m2 / samples, target, 0.05 * target);
}

TEST(FrobeniusGap, MatchesDenseComputation) {
  Rng rng = make_rng(6);
  for (int t = 0; t < 20; ++t) {
    const Vector z = random_signs(30, rng);
    const CirclePoint q = random_point(30, rng);
    EXPECT_NEAR(frobenius_gap(q, z), dense_gap(q, z), 1e-10 * (1.0 + dense_gap(q, z)));
  }
}

TEST(FrobeniusGap, AccurateNearExactRecovery) {
  // Row 0 turned by θ: the off-diagonal entries (0,j) become zᵢzⱼcos θ, so the
  // gap is √(2(n−1))·(1 − cos θ) = √(2(n−1))·2sin²(θ/2). A dense difference
  // of QQᵀ and zzᵀ loses most of those digits.
  Rng rng = make_rng(7);
  const Index n = 1000;
  const Vector z = random_signs(n, rng);
  for (double theta : {1e-3, 1e-5, 1e-6}) {
    RowMatrix2 rows = CirclePoint::from_signs(z).rows();
    rows.row(0) = z(0) * Eigen::RowVector2d(std::cos(theta), std::sin(theta));
    const CirclePoint q(rows);
    const double s = std::sin(theta / 2.0);
    const double expected = std::sqrt(2.0 * (n - 1)) * 2.0 * s * s;
    EXPECT_NEAR(frobenius_gap(q, z), expected, 1e-6 * expected) << "theta " << theta;
  }
}

TEST(ExactRecovery, RotationsOfPlantedPoint) {
  Rng rng = make_rng(8);
  const Vector z = random_signs(80, rng);
  for (int t = 0; t < 10; ++t) {
    const CirclePoint q(CirclePoint::from_signs(z).rows() * rotation(0.7 * t, t % 3 == 0));
    EXPECT_TRUE(exact_recovery(q, z));
    EXPECT_TRUE(exact_recovery(q, -z, 1e-9));
  }
}

TEST(ExactRecovery, OneFlippedRow) {
  for (Index n : {2, 5, 40}) {
    Rng rng = make_rng(9);
    const Vector z = random_signs(n, rng);
    Vector x = z;
    x(0) *= -1.0;
    const CirclePoint q = CirclePoint::from_signs(x);
    EXPECT_NEAR(frobenius_gap(q, z), std::sqrt(8.0 * (n - 1)), 1e-12);
    EXPECT_NEAR(dense_gap(q, z), std::sqrt(8.0 * (n - 1)), 1e-12);
    EXPECT_FALSE(exact_recovery(q, z, 1.0));
  }
}

TEST(ExactRecovery, RandomPointFails) {
  Rng rng = make_rng(10);
  EXPECT_FALSE(exact_recovery(random_point(500, rng), random_signs(500, rng)));
}

TEST(RecoveryMetrics, ConsistentFields) {
  const Z2Instance inst = gen_z2(60, LambdaSnr{20.0}, 11);
  Rng rng = make_rng(11);
  const CirclePoint q = CirclePoint::from_signs(inst.z);
  const RecoveryMetrics m = recovery_metrics(q, inst.z, rng);
  EXPECT_EQ(m.correlation, 1.0);
  EXPECT_EQ(m.overlap, 1.0);
  EXPECT_TRUE(m.exact);
  EXPECT_EQ(m.frobenius_gap, 0.0);
  const auto j = to_json(m);
  EXPECT_EQ(j.at("exact"), true);
}

TEST(SpectralBaseline, NoiselessReturnsTruth) {
  const Z2Instance inst = gen_z2(300, SigmaSnr{0.0}, 12);
  EXPECT_EQ(overlap(spectral_baseline(inst.y), inst.z), 1.0);
}

TEST(SpectralBaseline, AboveTransitionCorrelates) {
  int good = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const Z2Instance inst = gen_z2(2000, LambdaSnr{5.0}, 100 + s);
    if (overlap(spectral_baseline(inst.y), inst.z) > 0.2) ++good;
  }
  EXPECT_GE(good, 18);  // ≥ 90%
}

TEST(SpectralBaseline, BelowTransitionIsNearChance) {
  int near_zero = 0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    const Z2Instance inst = gen_z2(2000, LambdaSnr{0.2}, 200 + s);
    if (overlap(spectral_baseline(inst.y), inst.z) <= 3.0 / std::sqrt(2000.0)) ++near_zero;
  }
  EXPECT_GE(near_zero, 9);
}
