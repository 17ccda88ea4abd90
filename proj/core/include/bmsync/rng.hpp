#pragma once

#include "bmsync/symop.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace bmsync {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Generator seeded through splitmix64, so nearby seeds give unrelated streams.
Rng make_rng(std::uint64_t seed);

/// Hash of a master seed and an index path, e.g. (grid, trial, restart).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

Vector standard_normal(Index n, Rng& rng);

}  // namespace bmsync
