#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "curator/embedding.hpp"

namespace curator {

// Per-row manifold-density scores; higher means denser. Log-density units for
// the likelihood scorers, negative distance for k-NN.
class ScoreVector {
 public:
  ScoreVector() = default;
  explicit ScoreVector(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const& noexcept { return values_; }
  std::vector<double> values() && noexcept { return std::move(values_); }

 private:
  std::vector<double> values_;
};

inline constexpr double kDefaultRegularization = 1e-6;
inline constexpr double kDefaultVarianceThreshold = 0.95;
inline constexpr std::size_t kDefaultNeighbors = 5;

// Full-covariance Gaussian. The covariance is the unbiased sample covariance
// plus a ridge of `regularization * trace / d` on the diagonal.
class GaussianModel {
 public:
  static GaussianModel fit(const EmbeddingMatrix& data,
                           double regularization = kDefaultRegularization);

  ScoreVector score(const EmbeddingMatrix& queries, int threads = 1) const;
  double score_one(std::span<const float> z) const;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }
  double log_det() const noexcept { return log_det_; }
  double regularization() const noexcept { return regularization_; }

 private:
  GaussianModel() = default;

  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd cholesky_lower_;
  double log_det_ = 0.0;
  double regularization_ = 0.0;
};

// Probabilistic PCA with C = W W^T + sigma^2 I, fit in closed form from the
// eigendecomposition of the sample covariance. The rotation is fixed to the
// identity, so the columns of W are scaled principal axes.
class PpcaModel {
 public:
  static PpcaModel fit(const EmbeddingMatrix& data,
                       double variance_threshold = kDefaultVarianceThreshold);

  ScoreVector score(const EmbeddingMatrix& queries, int threads = 1) const;
  double score_one(std::span<const float> z) const;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  std::size_t components() const noexcept { return static_cast<std::size_t>(weight_.cols()); }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& weight() const noexcept { return weight_; }
  // Orthonormal retained principal axes (d x q), canonical sign and order.
  const Eigen::MatrixXd& axes() const noexcept { return axes_; }
  double residual_variance() const noexcept { return residual_variance_; }
  double log_det() const noexcept { return log_det_; }
  // Sample-covariance eigenvalues, descending.
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  double explained_fraction() const noexcept { return explained_fraction_; }
  double variance_threshold() const noexcept { return variance_threshold_; }

 private:
  PpcaModel() = default;

  Eigen::VectorXd mean_;
  Eigen::MatrixXd weight_;
  Eigen::MatrixXd axes_;
  Eigen::MatrixXd inner_cholesky_lower_;  // chol(W^T W + sigma^2 I), q x q
  Eigen::VectorXd eigenvalues_;
  double residual_variance_ = 0.0;
  double log_det_ = 0.0;
  double explained_fraction_ = 0.0;
  double variance_threshold_ = 0.0;
};

// Negative distance to the k-th nearest reference point.
class KnnIndex {
 public:
  KnnIndex(EmbeddingMatrix reference, std::size_t k = kDefaultNeighbors);

  // With `queries_are_reference`, row i of `queries` is reference row i and is
  // excluded from its own neighbour set.
  ScoreVector score(const EmbeddingMatrix& queries, bool queries_are_reference,
                    int threads = 1) const;

  const EmbeddingMatrix& reference() const noexcept { return reference_; }
  std::size_t k() const noexcept { return k_; }

 private:
  EmbeddingMatrix reference_;
  std::size_t k_;
};

GaussianModel fit_gaussian(const EmbeddingMatrix& data,
                           double regularization = kDefaultRegularization);
ScoreVector score_gaussian(const GaussianModel& model, const EmbeddingMatrix& queries,
                           int threads = 1);
PpcaModel fit_ppca(const EmbeddingMatrix& data,
                   double variance_threshold = kDefaultVarianceThreshold);
ScoreVector score_ppca(const PpcaModel& model, const EmbeddingMatrix& queries, int threads = 1);
ScoreVector score_knn(const KnnIndex& index, const EmbeddingMatrix& queries,
                      bool queries_are_reference, int threads = 1);

enum class ScorerKind { kGaussian, kPpca, kKnn };

struct ScorerConfig {
  ScorerKind kind = ScorerKind::kGaussian;
  double regularization = kDefaultRegularization;
  double variance_threshold = kDefaultVarianceThreshold;
  std::size_t k = kDefaultNeighbors;
};

std::string to_string(ScorerKind kind);
ScorerKind parse_scorer_kind(const std::string& name);

// Fits the configured scorer on `data` and scores the same rows (k-NN with
// self exclusion).
ScoreVector fit_and_score(const EmbeddingMatrix& data, const ScorerConfig& config,
                          int threads = 1);

}  // namespace curator
