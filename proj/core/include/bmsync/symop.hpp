#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <memory>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace bmsync {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Thrown when operand sizes disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Immutable symmetric linear operator of size n.
///
/// A SymOp is a cheap handle around shared, immutable state: copies share the
/// representation, so values can be passed around and captured by concurrent
/// workers freely. Structured representations never materialize their dense
/// form; `densify()` exists for oracles and small-n paths.
class SymOp {
 public:
  /// Explicit symmetric matrix. Symmetrized on construction.
  struct Dense {
    Matrix values;
  };

  /// Sparse symmetric matrix, both triangles stored.
  struct Sparse {
    SparseMatrix values;
  };

  /// z zᵀ + scale·Δ, evaluated as z(zᵀv) + scale·(Δv).
  struct SpikeNoise;

  /// A − shift·𝟏𝟏ᵀ for a sparse 0/1 adjacency A.
  struct CenteredAdjacency {
    SparseMatrix adjacency;
    double shift;
  };

  /// base_scale·B + diag(diagonal) + Σₖ cₖ uₖuₖᵀ.
  struct LowRankUpdate;

  /// diag(diagonal) − Σₖ diag(tₖ) B diag(tₖ), tₖ the columns of `twist`.
  /// With twist = Q this is ddiag(·) − B∘(QQᵀ); with twist = 𝟏 it is diag − B.
  struct HadamardForm;

  /// Wraps the variant of the representations above; `repr().value`.
  struct Repr;

  /// The 0×0 operator, so aggregates holding a SymOp stay default-constructible.
  SymOp();

  static SymOp dense(Matrix values);
  static SymOp sparse(SparseMatrix values);
  static SymOp spike_noise(Vector labels, SymOp noise, double scale);
  static SymOp centered_adjacency(SparseMatrix adjacency, double shift);
  static SymOp low_rank_update(SymOp base, double base_scale, Vector diagonal,
                               std::vector<std::pair<double, Vector>> rank_one);
  static SymOp hadamard_form(SymOp base, Vector diagonal, Matrix twist);
  static SymOp identity(Index n);

  Index size() const { return n_; }
  const Repr& repr() const { return *repr_; }

  /// A·v.
  Vector apply(const Vector& v) const;
  /// A·V, column by column.
  Matrix apply(const Matrix& block) const;

  /// diag(A) without densifying.
  Vector diagonal() const;

  /// Dense copy. O(n²) memory; intended for n in the oracle range.
  Matrix densify() const;

 private:
  SymOp(Index n, std::shared_ptr<const Repr> repr) : n_(n), repr_(std::move(repr)) {}

  Index n_ = 0;
  std::shared_ptr<const Repr> repr_;
};

struct SymOp::SpikeNoise {
  Vector labels;
  SymOp noise;
  double scale;
};

struct SymOp::LowRankUpdate {
  SymOp base;
  double base_scale;
  Vector diagonal;
  std::vector<std::pair<double, Vector>> rank_one;
};

struct SymOp::HadamardForm {
  SymOp base;
  Vector diagonal;
  Matrix twist;
};

struct SymOp::Repr {
  std::variant<Dense, Sparse, SpikeNoise, CenteredAdjacency, LowRankUpdate, HadamardForm> value;
};

/// Free-function form of SymOp::apply; throws DimensionError on size mismatch.
Vector matvec(const SymOp& op, const Vector& v);

}  // namespace bmsync
