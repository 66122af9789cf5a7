#include "curator/sampling.hpp"

#include <random>
#include <string>

#include "curator/error.hpp"

namespace curator {

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t count,
                                           std::uint64_t seed) {
  if (count > n) {
    ThrowValidation("cannot sample " + std::to_string(count) + " rows from " +
                    std::to_string(n));
  }
  std::vector<std::size_t> picked;
  picked.reserve(count);
  if (count == n) {
    for (std::size_t i = 0; i < n; ++i) picked.push_back(i);
    return picked;
  }
  std::mt19937_64 rng(seed);
  // Knuth, Algorithm S.
  std::size_t needed = count;
  for (std::size_t i = 0; i < n && needed > 0; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u * static_cast<double>(n - i) < static_cast<double>(needed)) {
      picked.push_back(i);
      --needed;
    }
  }
  return picked;
}

EmbeddingMatrix subsample(const EmbeddingMatrix& matrix, std::size_t count,
                          std::uint64_t seed) {
  const auto indices = subsample_indices(matrix.rows(), count, seed);
  return matrix.take_rows(indices);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace curator
