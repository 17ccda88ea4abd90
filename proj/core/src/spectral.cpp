#include "bmsync/spectral.hpp"

#include "bmsync/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bmsync {
namespace {

void validate(Index n, const EigenOptions& options) {
  if (n < 1) throw std::invalid_argument("extreme_eigenpair: operator size must be >= 1");
  if (!(options.tol > 0.0)) throw std::invalid_argument("extreme_eigenpair: tol must be > 0");
  if (options.max_iter < 1) throw std::invalid_argument("extreme_eigenpair: max_iter must be >= 1");
}

EigResult finish_or_throw(EigResult result, double tol, const char* path) {
  if (result.residual <= tol) return result;
  throw EigenNotConverged(std::string("extreme_eigenpair (") + path + "): residual " +
                              std::to_string(result.residual) + " above tolerance " +
                              std::to_string(tol),
                          std::move(result));
}

EigResult dense_eigenpair(const Matrix& dense, const MatvecFn& apply, Extreme which,
                          const EigenOptions& options, int applies) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(dense);
  if (solver.info() != Eigen::Success) {
    throw EigenNotConverged("extreme_eigenpair (dense): eigensolver failed", EigResult{});
  }
  const Index idx = which == Extreme::smallest ? 0 : dense.rows() - 1;
  EigResult result;
  result.value = solver.eigenvalues()(idx);
  result.vector = solver.eigenvectors().col(idx).normalized();
  Vector av(dense.rows());
  apply(result.vector, av);
  result.residual = (av - result.value * result.vector).norm();
  result.iterations = applies + 1;
  return finish_or_throw(std::move(result), options.tol, "dense");
}

EigResult lanczos(Index n, const MatvecFn& apply, Extreme which, const EigenOptions& options) {
  const Index m = std::min<Index>(n, std::max(options.basis_size, 8));
  const Index check_every = 10;
  Matrix basis(n, m);
  Matrix image(n, m);  // image.col(j) = A·basis.col(j)
  Matrix projected = Matrix::Zero(m, m);

  Rng rng = make_rng(options.seed);
  Vector next = standard_normal(n, rng);
  Vector w(n);
  Index k = 0;
  int applies = 0;
  int random_refills = 0;

  EigResult best;
  best.residual = std::numeric_limits<double>::infinity();

  while (true) {
    const double raw_norm = next.norm();
    for (int pass = 0; pass < 2 && k > 0; ++pass) {
      const Vector h = basis.leftCols(k).transpose() * next;
      next.noalias() -= basis.leftCols(k) * h;
    }
    const double norm = next.norm();
    if (!(norm > 1e-10 * raw_norm) || norm == 0.0) {
      // Krylov space became invariant; continue from a fresh random direction.
      if (++random_refills > 50) {
        throw EigenNotConverged("extreme_eigenpair (lanczos): could not extend basis", best);
      }
      next = standard_normal(n, rng);
      continue;
    }
    basis.col(k) = next / norm;
    apply(basis.col(k), w);
    ++applies;
    image.col(k) = w;
    const Vector column = basis.leftCols(k + 1).transpose() * w;
    projected.col(k).head(k + 1) = column;
    projected.row(k).head(k + 1) = column.transpose();
    ++k;

    const bool full = k == m;
    const bool exhausted = applies >= options.max_iter;
    if (full || exhausted || k % check_every == 0) {
      Matrix t = projected.topLeftCorner(k, k);
      t = 0.5 * (t + t.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Matrix> ritz(t);
      const Index idx = which == Extreme::smallest ? 0 : k - 1;
      const double theta = ritz.eigenvalues()(idx);
      const Vector s = ritz.eigenvectors().col(idx);
      Vector y = basis.leftCols(k) * s;
      const double ynorm = y.norm();
      y /= ynorm;
      const Vector ay = (image.leftCols(k) * s) / ynorm;
      Vector r = ay - theta * y;
      const double res = r.norm();

      if (res <= options.tol || k == n) {
        Vector fresh(n);
        apply(y, fresh);
        ++applies;
        EigResult candidate{theta, y, (fresh - theta * y).norm(), applies};
        if (candidate.residual < best.residual) best = candidate;
        if (candidate.residual <= options.tol) return candidate;
        if (k == n) return finish_or_throw(best, options.tol, "lanczos, full space");
      } else if (res < best.residual) {
        best = EigResult{theta, y, res, applies};
      }
      if (exhausted) return finish_or_throw(best, options.tol, "lanczos, iteration limit");

      if (full) {
        const Index keep = std::max<Index>(1, k / 2);
        const Index first = which == Extreme::smallest ? 0 : k - keep;
        const Matrix sk = ritz.eigenvectors().middleCols(first, keep);
        const Matrix new_basis = basis.leftCols(k) * sk;
        const Matrix new_image = image.leftCols(k) * sk;
        basis.leftCols(keep) = new_basis;
        image.leftCols(keep) = new_image;
        projected.setZero();
        projected.topLeftCorner(keep, keep) = sk.transpose() * t * sk;
        k = keep;
        next = std::move(r);
        continue;
      }
    }
    next = image.col(k - 1);
  }
}

}  // namespace

EigResult extreme_eigenpair(Index n, const MatvecFn& apply, Extreme which,
                            const EigenOptions& options) {
  validate(n, options);
  if (n <= kDenseEigenCutoff) {
    Matrix dense(n, n);
    Vector e = Vector::Zero(n);
    Vector col(n);
    for (Index j = 0; j < n; ++j) {
      e(j) = 1.0;
      apply(e, col);
      dense.col(j) = col;
      e(j) = 0.0;
    }
    dense = 0.5 * (dense + dense.transpose()).eval();
    return dense_eigenpair(dense, apply, which, options, static_cast<int>(n));
  }
  return lanczos(n, apply, which, options);
}

EigResult extreme_eigenpair(const SymOp& op, Extreme which, const EigenOptions& options) {
  validate(op.size(), options);
  const MatvecFn apply = [&op](const Vector& in, Vector& out) { out = op.apply(in); };
  if (op.size() <= kDenseEigenCutoff) {
    return dense_eigenpair(op.densify(), apply, which, options, 0);
  }
  return lanczos(op.size(), apply, which, options);
}

EigResult extreme_eigenpair(const SymOp& op, Extreme which, double tol, int max_iter) {
  EigenOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  return extreme_eigenpair(op, which, options);
}

double spectral_norm(const SymOp& op, double tol, int max_iter) {
  EigenOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  const double lo = extreme_eigenpair(op, Extreme::smallest, options).value;
  options.seed ^= 0x9e3779b97f4a7c15ULL;
  const double hi = extreme_eigenpair(op, Extreme::largest, options).value;
  return std::max(std::abs(lo), std::abs(hi));
}

}  // namespace bmsync
