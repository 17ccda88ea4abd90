#pragma once

#include "bmsync/symop.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace bmsync {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `%.17g`, the round-trip format used by every text file this library writes.
std::string format_double(double value);

/// Coordinate text format: a header line `n`, then one `i j value` triplet per
/// line for the nonzero upper triangle (0-based, i ≤ j).
void write_coordinate(std::ostream& out, const SymOp& op);
void write_coordinate(const std::filesystem::path& path, const SymOp& op);

/// Reads the coordinate format. Lower-triangle entries, out-of-range indices and
/// duplicates are rejected. Returns a Dense operator for n ≤ 64 or dense fill,
/// otherwise a Sparse one.
SymOp read_coordinate(std::istream& in);
SymOp read_coordinate(const std::filesystem::path& path);

}  // namespace bmsync
