#include "bmsync/symop.hpp"

#include <cmath>
#include <string>

namespace bmsync {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_size(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": expected size " + std::to_string(expected) +
                         ", got " + std::to_string(got));
  }
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Symmetric within 1e-12 relative, then exactly symmetrized: (a + b)/2 == (b + a)/2.
Matrix symmetrized(Matrix values, const char* what) {
  if (values.rows() != values.cols()) {
    throw DimensionError(std::string(what) + ": matrix is not square");
  }
  const double scale = std::max(1.0, max_abs(values));
  if (max_abs(values - values.transpose()) > 1e-12 * scale) {
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
  }
  Matrix sym = 0.5 * (values + values.transpose());
  return sym;
}

SparseMatrix symmetrized(SparseMatrix values, const char* what) {
  if (values.rows() != values.cols()) {
    throw DimensionError(std::string(what) + ": matrix is not square");
  }
  SparseMatrix transposed = values.transpose();
  SparseMatrix diff = values - transposed;
  double scale = 1.0;
  for (Index k = 0; k < values.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(values, k); it; ++it) {
      scale = std::max(scale, std::abs(it.value()));
    }
  }
  for (Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      if (std::abs(it.value()) > 1e-12 * scale) {
        throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
      }
    }
  }
  SparseMatrix sym = 0.5 * (values + transposed);
  sym.makeCompressed();
  return sym;
}

}  // namespace

SymOp SymOp::dense(Matrix values) {
  Matrix sym = symmetrized(std::move(values), "SymOp::dense");
  const Index n = sym.rows();
  return SymOp(n, std::make_shared<const Repr>(Repr{Dense{std::move(sym)}}));
}

SymOp SymOp::sparse(SparseMatrix values) {
  SparseMatrix sym = symmetrized(std::move(values), "SymOp::sparse");
  const Index n = sym.rows();
  return SymOp(n, std::make_shared<const Repr>(Repr{Sparse{std::move(sym)}}));
}

SymOp SymOp::spike_noise(Vector labels, SymOp noise, double scale) {
  require_size(noise.size(), labels.size(), "SymOp::spike_noise labels");
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("SymOp::spike_noise: scale must be finite and >= 0");
  }
  const Index n = labels.size();
  return SymOp(n, std::make_shared<const Repr>(Repr{SpikeNoise{std::move(labels), std::move(noise), scale}}));
}

SymOp SymOp::centered_adjacency(SparseMatrix adjacency, double shift) {
  SparseMatrix sym = symmetrized(std::move(adjacency), "SymOp::centered_adjacency");
  const Index n = sym.rows();
  return SymOp(n, std::make_shared<const Repr>(Repr{CenteredAdjacency{std::move(sym), shift}}));
}

SymOp SymOp::low_rank_update(SymOp base, double base_scale, Vector diagonal,
                             std::vector<std::pair<double, Vector>> rank_one) {
  const Index n = base.size();
  require_size(n, diagonal.size(), "SymOp::low_rank_update diagonal");
  for (const auto& term : rank_one) {
    require_size(n, term.second.size(), "SymOp::low_rank_update rank-one term");
  }
  return SymOp(n, std::make_shared<const Repr>(Repr{LowRankUpdate{std::move(base), base_scale,
                                                              std::move(diagonal), std::move(rank_one)}}));
}

SymOp SymOp::hadamard_form(SymOp base, Vector diagonal, Matrix twist) {
  const Index n = base.size();
  require_size(n, diagonal.size(), "SymOp::hadamard_form diagonal");
  require_size(n, twist.rows(), "SymOp::hadamard_form twist");
  return SymOp(n, std::make_shared<const Repr>(Repr{HadamardForm{std::move(base), std::move(diagonal),
                                                             std::move(twist)}}));
}

SymOp::SymOp() : SymOp(0, std::make_shared<const Repr>(Repr{Dense{Matrix(0, 0)}})) {}

SymOp SymOp::identity(Index n) { return dense(Matrix::Identity(n, n)); }

Vector SymOp::apply(const Vector& v) const {
  require_size(n_, v.size(), "SymOp::apply");
  return std::visit(
      Overloaded{
          [&](const Dense& d) -> Vector { return d.values * v; },
          [&](const Sparse& s) -> Vector { return s.values * v; },
          [&](const SpikeNoise& s) -> Vector {
            Vector out = s.labels * s.labels.dot(v);
            if (s.scale != 0.0) out.noalias() += s.scale * s.noise.apply(v);
            return out;
          },
          [&](const CenteredAdjacency& c) -> Vector {
            Vector out = c.adjacency * v;
            out.array() -= c.shift * v.sum();
            return out;
          },
          [&](const LowRankUpdate& l) -> Vector {
            Vector out = l.base_scale * l.base.apply(v);
            out.array() += l.diagonal.array() * v.array();
            for (const auto& [coef, u] : l.rank_one) out.noalias() += (coef * u.dot(v)) * u;
            return out;
          },
          [&](const HadamardForm& h) -> Vector {
            Vector out = h.diagonal.cwiseProduct(v);
            for (Index k = 0; k < h.twist.cols(); ++k) {
              const auto t = h.twist.col(k);
              const Vector tv = t.cwiseProduct(v);
              out.array() -= t.array() * h.base.apply(tv).array();
            }
            return out;
          },
      },
      repr_->value);
}

Matrix SymOp::apply(const Matrix& block) const {
  require_size(n_, block.rows(), "SymOp::apply");
  if (const auto* d = std::get_if<Dense>(&repr_->value)) return d->values * block;
  if (const auto* s = std::get_if<Sparse>(&repr_->value)) return s->values * block;
  Matrix out(n_, block.cols());
  for (Index k = 0; k < block.cols(); ++k) out.col(k) = apply(Vector(block.col(k)));
  return out;
}

Vector SymOp::diagonal() const {
  return std::visit(
      Overloaded{
          [&](const Dense& d) -> Vector { return d.values.diagonal(); },
          [&](const Sparse& s) -> Vector { return Vector(s.values.diagonal()); },
          [&](const SpikeNoise& s) -> Vector {
            return s.labels.cwiseAbs2() + s.scale * s.noise.diagonal();
          },
          [&](const CenteredAdjacency& c) -> Vector {
            Vector out = c.adjacency.diagonal();
            out.array() -= c.shift;
            return out;
          },
          [&](const LowRankUpdate& l) -> Vector {
            Vector out = l.base_scale * l.base.diagonal() + l.diagonal;
            for (const auto& [coef, u] : l.rank_one) out += coef * u.cwiseAbs2();
            return out;
          },
          [&](const HadamardForm& h) -> Vector {
            Vector out = h.diagonal;
            const Vector base_diag = h.base.diagonal();
            for (Index k = 0; k < h.twist.cols(); ++k) {
              out.array() -= h.twist.col(k).array().square() * base_diag.array();
            }
            return out;
          },
      },
      repr_->value);
}

Matrix SymOp::densify() const {
  if (const auto* d = std::get_if<Dense>(&repr_->value)) return d->values;
  if (const auto* s = std::get_if<Sparse>(&repr_->value)) return Matrix(s->values);
  Matrix out = apply(Matrix(Matrix::Identity(n_, n_)));
  // Column j holds A e_j; average with the transpose to remove round-off asymmetry.
  Matrix sym = 0.5 * (out + out.transpose());
  return sym;
}

Vector matvec(const SymOp& op, const Vector& v) { return op.apply(v); }

}  // namespace bmsync
