#include "curator/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "curator/error.hpp"
#include "curator/parallel.hpp"

namespace curator {

namespace {

// Reference rows are visited in blocks so a block stays cache resident while
// a handful of queries sweep it.
constexpr std::size_t kQueryBlock = 16;
constexpr std::size_t kReferenceBlock = 256;

double squared_distance(const float* a, const float* b, std::size_t d) {
  double acc = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = static_cast<double>(a[j]) - static_cast<double>(b[j]);
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

double euclidean_distance(std::span<const float> a, std::span<const float> b) {
  return std::sqrt(squared_distance(a.data(), b.data(), a.size()));
}

std::vector<double> kth_neighbor_distances(const EmbeddingMatrix& queries,
                                           const EmbeddingMatrix& reference, std::size_t k,
                                           bool exclude_self, int threads) {
  if (queries.cols() != reference.cols()) {
    ThrowValidation("dimension mismatch: queries d=" + std::to_string(queries.cols()) +
                    ", reference d=" + std::to_string(reference.cols()));
  }
  if (exclude_self && queries.rows() != reference.rows()) {
    ThrowValidation("self-excluded search requires queries identical to the reference");
  }
  const std::size_t n = reference.rows();
  const std::size_t available = exclude_self ? n - 1 : n;
  if (k < 1 || k > available) {
    ThrowValidation("k out of range: k=" + std::to_string(k) + " with " +
                    std::to_string(available) + " candidate neighbours");
  }

  const std::size_t m = queries.rows();
  const std::size_t d = queries.cols();
  std::vector<double> out(m);
  const std::size_t blocks = (m + kQueryBlock - 1) / kQueryBlock;

  parallel_for(blocks, threads, [&](std::size_t block_begin, std::size_t block_end) {
    std::vector<std::vector<double>> dist(kQueryBlock);
    for (auto& v : dist) v.reserve(n);
    for (std::size_t b = block_begin; b < block_end; ++b) {
      const std::size_t q0 = b * kQueryBlock;
      const std::size_t q1 = std::min(m, q0 + kQueryBlock);
      for (std::size_t q = q0; q < q1; ++q) dist[q - q0].clear();
      for (std::size_t r0 = 0; r0 < n; r0 += kReferenceBlock) {
        const std::size_t r1 = std::min(n, r0 + kReferenceBlock);
        for (std::size_t q = q0; q < q1; ++q) {
          const float* qp = queries.row(q).data();
          auto& dq = dist[q - q0];
          for (std::size_t r = r0; r < r1; ++r) {
            if (exclude_self && r == q) continue;
            dq.push_back(squared_distance(qp, reference.row(r).data(), d));
          }
        }
      }
      for (std::size_t q = q0; q < q1; ++q) {
        auto& dq = dist[q - q0];
        std::nth_element(dq.begin(), dq.begin() + static_cast<std::ptrdiff_t>(k - 1), dq.end());
        out[q] = std::sqrt(dq[k - 1]);
      }
    }
  });
  return out;
}

}  // namespace curator
