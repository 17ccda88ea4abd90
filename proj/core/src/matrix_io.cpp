#include "bmsync/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

namespace bmsync {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_coordinate(std::ostream& out, const SymOp& op) {
  const Index n = op.size();
  out << n << '\n';
  auto emit = [&](Index i, Index j, double v) {
    if (v != 0.0) out << i << ' ' << j << ' ' << format_double(v) << '\n';
  };
  if (const auto* s = std::get_if<SymOp::Sparse>(&op.repr().value)) {
    // Column-major storage: column j lists rows i; keep i ≤ j.
    for (Index j = 0; j < s->values.outerSize(); ++j) {
      for (SparseMatrix::InnerIterator it(s->values, j); it; ++it) {
        if (it.row() <= j) emit(it.row(), j, it.value());
      }
    }
  } else {
    const Matrix dense = op.densify();
    for (Index i = 0; i < n; ++i) {
      for (Index j = i; j < n; ++j) emit(i, j, dense(i, j));
    }
  }
  if (!out) throw std::runtime_error("write_coordinate: stream write failed");
}

void write_coordinate(const std::filesystem::path& path, const SymOp& op) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_coordinate: cannot open " + path.string());
  write_coordinate(out, op);
}

SymOp read_coordinate(std::istream& in) {
  std::string line;
  long long n = -1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream header(line);
    if (!(header >> n) || n < 1) {
      throw FormatError("read_coordinate: line " + std::to_string(line_no) +
                        ": expected a positive dimension");
    }
    break;
  }
  if (n < 1) throw FormatError("read_coordinate: missing header");

  std::vector<Eigen::Triplet<double>> triplets;
  std::set<std::pair<long long, long long>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream row(line);
    long long i = 0, j = 0;
    double v = 0.0;
    std::string trailing;
    if (!(row >> i >> j >> v) || (row >> trailing)) {
      throw FormatError("read_coordinate: line " + std::to_string(line_no) +
                        ": expected `i j value`");
    }
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw FormatError("read_coordinate: line " + std::to_string(line_no) +
                        ": index out of range");
    }
    if (i > j) {
      throw FormatError("read_coordinate: line " + std::to_string(line_no) +
                        ": entry below the diagonal");
    }
    if (!seen.emplace(i, j).second) {
      throw FormatError("read_coordinate: line " + std::to_string(line_no) +
                        ": duplicate entry");
    }
    triplets.emplace_back(i, j, v);
    if (i != j) triplets.emplace_back(j, i, v);
  }

  SparseMatrix values(n, n);
  values.setFromTriplets(triplets.begin(), triplets.end());
  const auto nn = static_cast<double>(n) * static_cast<double>(n);
  if (n <= 64 || static_cast<double>(triplets.size()) > 0.25 * nn) {
    return SymOp::dense(Matrix(values));
  }
  return SymOp::sparse(std::move(values));
}

SymOp read_coordinate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_coordinate: cannot open " + path.string());
  try {
    return read_coordinate(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace bmsync
