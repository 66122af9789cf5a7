#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "curator/embedding.hpp"

namespace curator {

// Uniform sample of `count` distinct indices from [0, n), ascending. Uses
// selection sampling over a 64-bit Mersenne Twister with an explicit
// uniform-double conversion, so a seed gives the same subset on every
// platform.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t count,
                                           std::uint64_t seed);

// Rows of `matrix` picked by subsample_indices; relative order preserved.
EmbeddingMatrix subsample(const EmbeddingMatrix& matrix, std::size_t count,
                          std::uint64_t seed);

// Derives an independent stream seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace curator
