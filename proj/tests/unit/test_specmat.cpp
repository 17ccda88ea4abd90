#include "bmsync/matrix_io.hpp"
#include "bmsync/models.hpp"
#include "bmsync/spectral.hpp"
#include "bmsync/symop.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <sstream>

using namespace bmsync;
using bmsync::testing::random_signs;
using bmsync::testing::random_symmetric;
using bmsync::testing::sin_matrix;

namespace {

SparseMatrix random_adjacency(Index n, double p, Rng& rng) {
  std::bernoulli_distribution edge(p);
  std::vector<Eigen::Triplet<double>> t;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      if (!edge(rng)) continue;
      t.emplace_back(i, j, 1.0);
      if (i != j) t.emplace_back(j, i, 1.0);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

// One operator of every representation together with its dense equivalent,
// the dense form built independently of SymOp.
std::vector<std::pair<SymOp, Matrix>> all_representations(Index n, Rng& rng) {
  std::vector<std::pair<SymOp, Matrix>> out;
  const Matrix d = random_symmetric(n, rng);
  out.emplace_back(SymOp::dense(d), d);

  const SparseMatrix adj = random_adjacency(n, 0.3, rng);
  out.emplace_back(SymOp::sparse(adj), Matrix(adj));

  const Vector z = random_signs(n, rng);
  Matrix w = random_symmetric(n, rng);
  w.diagonal().setZero();
  out.emplace_back(SymOp::spike_noise(z, SymOp::dense(w), 0.7), z * z.transpose() + 0.7 * w);

  out.emplace_back(SymOp::centered_adjacency(adj, 0.15),
                   Matrix(adj) - 0.15 * Matrix::Ones(n, n));

  const Vector diag = standard_normal(n, rng);
  const Vector u = standard_normal(n, rng);
  out.emplace_back(SymOp::low_rank_update(SymOp::dense(d), -2.0, diag, {{0.5, u}}),
                   -2.0 * d + Matrix(diag.asDiagonal()) + 0.5 * u * u.transpose());

  Matrix twist(n, 2);
  twist.col(0) = standard_normal(n, rng);
  twist.col(1) = standard_normal(n, rng);
  out.emplace_back(SymOp::hadamard_form(SymOp::dense(d), diag, twist),
                   Matrix(diag.asDiagonal()) - d.cwiseProduct(twist * twist.transpose()));
  return out;
}

}  // namespace

TEST(Matvec, DenseIdentity) {
  const Vector v = (Vector(3) << 1, 2, 3).finished();
  EXPECT_EQ(matvec(SymOp::dense(Matrix::Identity(3, 3)), v), v);
  EXPECT_EQ(matvec(SymOp::identity(3), v), v);
}

TEST(Matvec, SpikeWithoutNoise) {
  const SymOp y = SymOp::spike_noise(Vector::Ones(2), SymOp::dense(Matrix::Zero(2, 2)), 0.0);
  const Vector out = matvec(y, (Vector(2) << 1, 0).finished());
  EXPECT_EQ(out, Vector::Ones(2));
}

TEST(Matvec, RandomDenseAgainstDirectMultiply) {
  Rng rng = make_rng(4);
  const Matrix a = random_symmetric(4, rng);
  const Vector v = standard_normal(4, rng);
  EXPECT_LE((matvec(SymOp::dense(a), v) - a * v).norm(), 1e-14);
}

TEST(Matvec, DimensionMismatchThrows) {
  EXPECT_THROW(matvec(SymOp::identity(3), Vector::Ones(4)), DimensionError);
}

TEST(Matvec, DefaultOperatorIsEmpty) {
  const SymOp empty;
  EXPECT_EQ(empty.size(), 0);
  EXPECT_EQ(matvec(empty, Vector(0)).size(), 0);
}

TEST(SymOpProperties, RepresentationsMatchTheirDenseForm) {
  Rng rng = make_rng(11);
  for (Index n : {1, 7, 50}) {
    for (const auto& [op, dense] : all_representations(n, rng)) {
      EXPECT_LE((op.densify() - dense).lpNorm<Eigen::Infinity>(), 1e-12 * (1.0 + dense.norm()));
      const Vector v = standard_normal(n, rng);
      EXPECT_LE((op.apply(v) - dense * v).norm(), 1e-12 * (1.0 + dense.norm() * v.norm()));
      EXPECT_LE((op.diagonal() - dense.diagonal()).norm(), 1e-12 * (1.0 + dense.norm()));
    }
  }
}

TEST(SymOpProperties, ExactSymmetryOnBasisVectors) {
  Rng rng = make_rng(12);
  const Index n = 9;
  for (const auto& rep : all_representations(n, rng)) {
    const Matrix m = rep.first.apply(Matrix(Matrix::Identity(n, n)));
    EXPECT_LE((m - m.transpose()).lpNorm<Eigen::Infinity>(), 1e-14 * (1.0 + m.norm()));
  }
}

TEST(SymOpProperties, BilinearSymmetry) {
  Rng rng = make_rng(13);
  for (const auto& [op, dense] : all_representations(30, rng)) {
    const double norm = dense.selfadjointView<Eigen::Lower>().eigenvalues().cwiseAbs().maxCoeff();
    for (int k = 0; k < 10; ++k) {
      const Vector v = standard_normal(30, rng);
      const Vector w = standard_normal(30, rng);
      const double lhs = op.apply(v).dot(w);
      const double rhs = v.dot(op.apply(w));
      EXPECT_LE(std::abs(lhs - rhs), 1e-12 * (1.0 + norm) * v.norm() * w.norm());
    }
  }
}

TEST(SymOpProperties, BlockApplyMatchesColumns) {
  Rng rng = make_rng(14);
  const auto reps = all_representations(12, rng);
  Matrix block(12, 3);
  for (int k = 0; k < 3; ++k) block.col(k) = standard_normal(12, rng);
  for (const auto& [op, dense] : reps) {
    const Matrix out = op.apply(block);
    for (int k = 0; k < 3; ++k) EXPECT_LE((out.col(k) - op.apply(Vector(block.col(k)))).norm(), 1e-13);
  }
}

TEST(ExtremeEigenpair, ShiftedSpikeSmallest) {
  const Index n = 5;
  const Vector z = Vector::Ones(n);
  const SymOp a = SymOp::dense(static_cast<double>(n) * Matrix::Identity(n, n) - z * z.transpose());
  const EigResult r = extreme_eigenpair(a, Extreme::smallest, 1e-10, 1000);
  EXPECT_NEAR(r.value, 0.0, 1e-10);
  EXPECT_NEAR(std::abs(r.vector.dot(z)) / std::sqrt(double(n)), 1.0, 1e-10);
  EXPECT_NEAR(r.vector.norm(), 1.0, 1e-12);
}

TEST(ExtremeEigenpair, IdentityLargest) {
  for (Index n : {1, 3, 200}) {
    const EigResult r = extreme_eigenpair(SymOp::identity(n), Extreme::largest, 1e-10, 1000);
    EXPECT_NEAR(r.value, 1.0, 1e-12);
  }
}

TEST(ExtremeEigenpair, MatchesDenseSolverOnSmallMatrices) {
  Rng rng = make_rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_symmetric(6, rng);
    const Eigen::SelfAdjointEigenSolver<Matrix> ref(a);
    const auto lo = extreme_eigenpair(SymOp::dense(a), Extreme::smallest, 1e-10, 1000);
    const auto hi = extreme_eigenpair(SymOp::dense(a), Extreme::largest, 1e-10, 1000);
    EXPECT_NEAR(lo.value, ref.eigenvalues()(0), 1e-8);
    EXPECT_NEAR(hi.value, ref.eigenvalues()(5), 1e-8);
  }
}

TEST(ExtremeEigenpair, LanczosPathMatchesFrozenValues) {
  // Reference eigenvalues from a LAPACK dense solve of sin_matrix(n, k).
  struct Case { Index n; double k; double lmin; double lmax; };
  for (const Case c : {Case{100, 0.3, -17.70862465494143, 18.28106125381329},
                       Case{200, 0.9, -16.65631630778672, 16.48895555991014}}) {
    const SymOp a = SymOp::dense(sin_matrix(c.n, c.k));
    EigenOptions opt;
    opt.tol = 1e-9;
    const auto lo = extreme_eigenpair(a, Extreme::smallest, opt);
    const auto hi = extreme_eigenpair(a, Extreme::largest, opt);
    EXPECT_NEAR(lo.value, c.lmin, 1e-8);
    EXPECT_NEAR(hi.value, c.lmax, 1e-8);
    EXPECT_LE(lo.residual, 1e-9);
    EXPECT_LE(hi.residual, 1e-9);
  }
}

TEST(ExtremeEigenpair, ResidualContractAndRayleighBracket) {
  Rng rng = make_rng(22);
  const Index n = 150;
  const Matrix a = random_symmetric(n, rng);
  const SymOp op = SymOp::dense(a);
  const double tol = 1e-8;
  const auto lo = extreme_eigenpair(op, Extreme::smallest, tol, 20000);
  const auto hi = extreme_eigenpair(op, Extreme::largest, tol, 20000);
  EXPECT_LE(lo.residual, tol);
  EXPECT_LE(hi.residual, tol);
  EXPECT_LE((a * lo.vector - lo.value * lo.vector).norm(), tol * 1.01);
  for (int k = 0; k < 100; ++k) {
    const Vector v = bmsync::testing::unit(standard_normal(n, rng));
    const double rq = v.dot(a * v);
    EXPECT_GE(rq, lo.value - 1e-12);
    EXPECT_LE(rq, hi.value + 1e-12);
  }
}

TEST(ExtremeEigenpair, DeterministicForFixedSeed) {
  Rng rng = make_rng(23);
  const SymOp op = SymOp::dense(random_symmetric(120, rng));
  EigenOptions opt;
  opt.seed = 99;
  const auto r1 = extreme_eigenpair(op, Extreme::smallest, opt);
  const auto r2 = extreme_eigenpair(op, Extreme::smallest, opt);
  EXPECT_EQ(r1.value, r2.value);
  EXPECT_EQ(r1.vector, r2.vector);
}

TEST(ExtremeEigenpair, NonConvergenceIsReported) {
  Rng rng = make_rng(24);
  const SymOp op = SymOp::dense(random_symmetric(300, rng));
  EigenOptions opt;
  opt.tol = 1e-13;
  opt.max_iter = 5;
  EXPECT_THROW(extreme_eigenpair(op, Extreme::smallest, opt), EigenNotConverged);
}

TEST(ExtremeEigenpair, MatrixFreeCallback) {
  const Index n = 100;
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = static_cast<double>(i + 1);
  const MatvecFn apply = [&](const Vector& in, Vector& out) { out = d.cwiseProduct(in); };
  EigenOptions opt;
  opt.tol = 1e-9;
  EXPECT_NEAR(extreme_eigenpair(n, apply, Extreme::smallest, opt).value, 1.0, 1e-9);
  EXPECT_NEAR(extreme_eigenpair(n, apply, Extreme::largest, opt).value, 100.0, 1e-9);
}

TEST(SpectralNorm, DiagonalExample) {
  const Matrix a = Vector((Vector(3) << 1, -3, 2).finished()).asDiagonal();
  EXPECT_NEAR(spectral_norm(SymOp::dense(a), 1e-10), 3.0, 1e-10);
}

TEST(SpectralNorm, RankOneSpike) {
  Rng rng = make_rng(31);
  const Vector z = random_signs(7, rng);
  EXPECT_NEAR(spectral_norm(SymOp::dense(z * z.transpose()), 1e-10), 7.0, 1e-10);
  EXPECT_NEAR(spectral_norm(SymOp::spike_noise(z, SymOp::identity(7), 0.0), 1e-10), 7.0, 1e-10);
}

TEST(SpectralNorm, FrozenDenseValue) {
  EXPECT_NEAR(spectral_norm(SymOp::dense(sin_matrix(10, 0.0)), 1e-12), 3.38732105088415, 1e-10);
}

TEST(SpectralNorm, WignerNormNearSemicircleEdge) {
  // ‖W‖ for n = 300 concentrates at 2√n ≈ 34.64 with O(n^{-1/6}) fluctuations.
  const Index n = 300;
  const double edge = 2.0 * std::sqrt(double(n));
  int inside = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Z2Instance inst = gen_z2(n, SigmaSnr{1.0}, derive_seed(777, {s}));
    const double norm = spectral_norm(inst.noise, 1e-6);
    if (norm >= edge - 5.0 && norm <= edge + 10.0) ++inside;
  }
  EXPECT_GE(inside, 95);
}

TEST(MatrixIo, CoordinateRoundTrip) {
  Rng rng = make_rng(41);
  for (const auto& [op, dense] : all_representations(8, rng)) {
    std::stringstream buf;
    write_coordinate(buf, op);
    const SymOp back = read_coordinate(buf);
    EXPECT_EQ(back.densify(), op.densify());
  }
}

TEST(MatrixIo, HeaderAndUpperTriangle) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = a(1, 0) = 0.1;
  a(2, 2) = -2.5;
  std::stringstream buf;
  write_coordinate(buf, SymOp::dense(a));
  std::string header;
  std::getline(buf, header);
  EXPECT_EQ(header, "3");
  Index i = 0, j = 0;
  double v = 0;
  int lines = 0;
  while (buf >> i >> j >> v) {
    EXPECT_LE(i, j);
    ++lines;
  }
  EXPECT_EQ(lines, 2);
}

TEST(MatrixIo, SeventeenDigitFloats) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(MatrixIo, RejectsMalformedInput) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_coordinate(in);
  };
  EXPECT_THROW(parse(""), FormatError);
  EXPECT_THROW(parse("2\n1 0 1.0\n"), FormatError);     // lower triangle
  EXPECT_THROW(parse("2\n0 2 1.0\n"), FormatError);     // out of range
  EXPECT_THROW(parse("2\n0 1 1.0\n0 1 2.0\n"), FormatError);  // duplicate
  EXPECT_THROW(parse("2\n0 1 abc\n"), FormatError);
  EXPECT_EQ(parse("2\n0 1 1.5\n").densify()(1, 0), 1.5);
}

TEST(MatrixIo, LargeSparseStaysSparse) {
  std::ostringstream text;
  text << "100\n0 99 1\n5 5 2\n";
  std::istringstream in(text.str());
  const SymOp op = read_coordinate(in);
  EXPECT_TRUE(std::holds_alternative<SymOp::Sparse>(op.repr().value));
  EXPECT_EQ(op.diagonal()(5), 2.0);
}
