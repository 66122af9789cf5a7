#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "curator/embedding.hpp"

namespace curator {

// Euclidean distance between two rows, accumulated sequentially in double.
// Every distance in the library goes through this function so that neighbour
// searches, radii and membership tests agree bit for bit.
double euclidean_distance(std::span<const float> a, std::span<const float> b);

// For each query row, the k-th smallest distance (counting multiplicity) to
// the reference rows. With `exclude_self`, query i and reference i are the
// same point and that pair is skipped. Exact brute force.
std::vector<double> kth_neighbor_distances(const EmbeddingMatrix& queries,
                                           const EmbeddingMatrix& reference, std::size_t k,
                                           bool exclude_self, int threads = 1);

}  // namespace curator
