#include "bmsync/circle.hpp"

#include "bmsync/matrix_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace bmsync {

CirclePoint::CirclePoint(RowMatrix2 rows) : rows_(std::move(rows)) {
  for (Index i = 0; i < rows_.rows(); ++i) {
    if (std::abs(rows_.row(i).norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("CirclePoint: row " + std::to_string(i) + " is not unit norm");
    }
  }
}

CirclePoint CirclePoint::normalized(RowMatrix2 rows, double max_deviation) {
  for (Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    if (!(std::abs(norm - 1.0) <= max_deviation)) {
      throw std::invalid_argument("CirclePoint: row " + std::to_string(i) + " has norm " +
                                  format_double(norm));
    }
    rows.row(i) /= norm;
  }
  return CirclePoint(std::move(rows));
}

CirclePoint CirclePoint::from_signs(const Vector& labels) {
  RowMatrix2 rows = RowMatrix2::Zero(labels.size(), 2);
  rows.col(0) = labels;
  return CirclePoint(std::move(rows));
}

RowMatrix2 rotate_quarter(const RowMatrix2& rows) {
  RowMatrix2 out(rows.rows(), 2);
  out.col(0) = -rows.col(1);
  out.col(1) = rows.col(0);
  return out;
}

CirclePoint random_point(Index n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("random_point: n must be >= 1");
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  RowMatrix2 rows(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double theta = angle(rng);
    rows(i, 0) = std::cos(theta);
    rows(i, 1) = std::sin(theta);
    rows.row(i) /= rows.row(i).norm();
  }
  return CirclePoint(std::move(rows));
}

CirclePoint retract(const CirclePoint& q, const TangentCoeffs& alpha, double t) {
  if (alpha.size() != q.size()) throw DimensionError("retract: coefficient size mismatch");
  if (t == 0.0) return q;
  RowMatrix2 rows = q.rows();
  for (Index i = 0; i < rows.rows(); ++i) {
    const double angle = t * alpha(i);
    if (angle == 0.0) continue;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double x = rows(i, 0);
    const double y = rows(i, 1);
    rows(i, 0) = c * x - s * y;
    rows(i, 1) = s * x + c * y;
    rows.row(i) /= rows.row(i).norm();
  }
  return CirclePoint(std::move(rows));
}

double cost(const SymOp& a, const CirclePoint& q) {
  if (a.size() != q.size()) throw DimensionError("cost: dimension mismatch");
  const Matrix aq = a.apply(Matrix(q.rows()));
  return (aq.array() * q.rows().array()).sum();
}

TangentCoeffs rgrad_from_image(const RowMatrix2& aq, const CirclePoint& q) {
  const RowMatrix2 jq = rotate_quarter(q.rows());
  return 2.0 * (aq.array() * jq.array()).rowwise().sum().matrix();
}

TangentCoeffs rgrad(const SymOp& a, const CirclePoint& q) {
  if (a.size() != q.size()) throw DimensionError("rgrad: dimension mismatch");
  const RowMatrix2 aq = a.apply(Matrix(q.rows()));
  return rgrad_from_image(aq, q);
}

SymOp hess_matrix_from_image(const SymOp& a, const RowMatrix2& aq, const CirclePoint& q) {
  Vector d = (aq.array() * q.rows().array()).rowwise().sum().matrix();
  return SymOp::hadamard_form(a, std::move(d), Matrix(q.rows()));
}

SymOp hess_matrix(const SymOp& a, const CirclePoint& q) {
  if (a.size() != q.size()) throw DimensionError("hess_matrix: dimension mismatch");
  const RowMatrix2 aq = a.apply(Matrix(q.rows()));
  return hess_matrix_from_image(a, aq, q);
}

void write_point(std::ostream& out, const CirclePoint& q) {
  for (Index i = 0; i < q.size(); ++i) {
    out << format_double(q.rows()(i, 0)) << ' ' << format_double(q.rows()(i, 1)) << '\n';
  }
  if (!out) throw std::runtime_error("write_point: stream write failed");
}

void write_point(const std::filesystem::path& path, const CirclePoint& q) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_point: cannot open " + path.string());
  write_point(out, q);
}

CirclePoint read_point(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream row(line);
    double a = 0.0, b = 0.0;
    std::string trailing;
    if (!(row >> a >> b) || (row >> trailing)) {
      throw FormatError("read_point: line " + std::to_string(line_no) + ": expected two values");
    }
    values.push_back(a);
    values.push_back(b);
  }
  if (values.empty()) throw FormatError("read_point: no rows");
  const auto n = static_cast<Index>(values.size() / 2);
  RowMatrix2 rows(n, 2);
  for (Index i = 0; i < n; ++i) {
    rows(i, 0) = values[2 * i];
    rows(i, 1) = values[2 * i + 1];
  }
  try {
    return CirclePoint::normalized(std::move(rows), 1e-6);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("read_point: ") + e.what());
  }
}

CirclePoint read_point(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_point: cannot open " + path.string());
  return read_point(in);
}

}  // namespace bmsync
