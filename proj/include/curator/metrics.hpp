#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "curator/embedding.hpp"

namespace curator {

// Rows are class distributions p(y|x): non-negative, each summing to 1 within
// 1e-5.
class ProbabilityMatrix {
 public:
  explicit ProbabilityMatrix(EmbeddingMatrix probs);

  std::size_t rows() const noexcept { return probs_.rows(); }
  std::size_t classes() const noexcept { return probs_.cols(); }
  std::span<const float> row(std::size_t i) const noexcept { return probs_.row(i); }

 private:
  EmbeddingMatrix probs_;
};

struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::size_t n_source = 0;
};

struct ManifoldRadii {
  std::vector<double> radii;
  std::size_t k = 0;
};

struct MetricReport {
  std::string name;
  double value = 0.0;
  std::optional<double> std;
  std::size_t n_real = 0;
  std::size_t n_gen = 0;
  std::optional<std::size_t> k;
  std::optional<std::size_t> splits;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> warning;
};

inline constexpr std::size_t kDefaultSplits = 10;
inline constexpr std::size_t kDefaultManifoldSamples = 10000;

// exp(mean KL(p_i || p_bar)) per contiguous split; value is the mean over
// splits and std the population standard deviation.
MetricReport inception_score(const ProbabilityMatrix& probs, std::size_t splits = kDefaultSplits);

// Mean and unbiased covariance, no regularization.
GaussianSummary gaussian_summary(const EmbeddingMatrix& features);

// ||mu_a - mu_b||^2 + Tr(S_a) + Tr(S_b) - 2 Tr((S_a^1/2 S_b S_a^1/2)^1/2).
MetricReport frechet_distance(const GaussianSummary& a, const GaussianSummary& b);

ManifoldRadii manifold_radii(const EmbeddingMatrix& set, std::size_t k, int threads = 1);

// Fraction of `points` lying inside at least one ball (center manifold[i],
// radius radii[i]), membership with <=.
double manifold_membership(const EmbeddingMatrix& points, const EmbeddingMatrix& manifold,
                           const ManifoldRadii& radii, int threads = 1);

struct MetricPair {
  MetricReport first;
  MetricReport second;
};

// {precision, recall}.
MetricPair precision_recall(const EmbeddingMatrix& real, const EmbeddingMatrix& generated,
                            std::size_t k = 5, int threads = 1);
// {density, coverage}.
MetricPair density_coverage(const EmbeddingMatrix& real, const EmbeddingMatrix& generated,
                            std::size_t k = 5, int threads = 1);

}  // namespace curator
