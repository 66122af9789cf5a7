#include "curator/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "curator/error.hpp"
#include "curator/neighbors.hpp"
#include "curator/parallel.hpp"
#include "curator/stats.hpp"

namespace curator {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_query_dim(std::size_t model_dim, const EmbeddingMatrix& queries) {
  if (queries.cols() != model_dim) {
    ThrowValidation("dimension mismatch: model d=" + std::to_string(model_dim) +
                    ", queries d=" + std::to_string(queries.cols()));
  }
}

// True when the Cholesky factor is too close to singular to trust.
bool near_singular(const Eigen::MatrixXd& lower) {
  const Eigen::VectorXd diag = lower.diagonal();
  const double max_pivot = diag.maxCoeff();
  const double min_pivot = diag.minCoeff();
  if (!(max_pivot > 0.0) || !(min_pivot > 0.0)) return true;
  const double eps = std::numeric_limits<double>::epsilon();
  return min_pivot * min_pivot <= static_cast<double>(diag.size()) * eps * max_pivot * max_pivot;
}

double log_det_from_cholesky(const Eigen::MatrixXd& lower) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) acc += std::log(lower(i, i));
  return 2.0 * acc;
}

template <typename ScoreRow>
ScoreVector score_rows(const EmbeddingMatrix& queries, int threads, ScoreRow&& score_row) {
  std::vector<double> out(queries.rows());
  parallel_for(queries.rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = score_row(queries.row(i));
  });
  return ScoreVector(std::move(out));
}

}  // namespace

ScoreVector::ScoreVector(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      ThrowNumeric("non-finite score at row " + std::to_string(i));
    }
  }
}

// ---------------------------------------------------------------------------
// Gaussian

GaussianModel GaussianModel::fit(const EmbeddingMatrix& data, double regularization) {
  if (!(regularization >= 0.0) || !std::isfinite(regularization)) {
    ThrowValidation("regularization must be a finite value >= 0");
  }
  auto stats = sample_mean_covariance(data);
  const auto d = stats.covariance.rows();

  // Ridge relative to the mean diagonal; an all-zero covariance falls back to
  // an absolute ridge so that reg > 0 always yields a proper density.
  const double mean_diag = stats.covariance.trace() / static_cast<double>(d);
  const double scale = mean_diag > 0.0 ? mean_diag : 1.0;
  stats.covariance.diagonal().array() += regularization * scale;

  Eigen::LLT<Eigen::MatrixXd> llt(stats.covariance);
  Eigen::MatrixXd lower = llt.matrixL();
  if (llt.info() != Eigen::Success || near_singular(lower)) {
    ThrowNumeric("singular covariance; increase regularization or use PPCA/KNN");
  }

  GaussianModel model;
  model.mean_ = std::move(stats.mean);
  model.covariance_ = std::move(stats.covariance);
  model.cholesky_lower_ = std::move(lower);
  model.log_det_ = log_det_from_cholesky(model.cholesky_lower_);
  model.regularization_ = regularization;
  return model;
}

double GaussianModel::score_one(std::span<const float> z) const {
  const Eigen::VectorXd centered = to_vector(z) - mean_;
  const Eigen::VectorXd whitened =
      cholesky_lower_.triangularView<Eigen::Lower>().solve(centered);
  const double quad = whitened.squaredNorm();
  return -0.5 * (log_det_ + quad + static_cast<double>(dim()) * kLog2Pi);
}

ScoreVector GaussianModel::score(const EmbeddingMatrix& queries, int threads) const {
  check_query_dim(dim(), queries);
  return score_rows(queries, threads, [this](std::span<const float> z) { return score_one(z); });
}

// ---------------------------------------------------------------------------
// PPCA

PpcaModel PpcaModel::fit(const EmbeddingMatrix& data, double variance_threshold) {
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0)) {
    ThrowValidation("variance threshold must lie in (0, 1]");
  }
  if (data.cols() < 2) ThrowValidation("PPCA requires d >= 2");
  auto stats = sample_mean_covariance(data);
  const Eigen::Index d = stats.covariance.rows();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(stats.covariance);
  if (solver.info() != Eigen::Success) ThrowNumeric("eigendecomposition failed");
  const Eigen::VectorXd& values = solver.eigenvalues();
  Eigen::MatrixXd vectors = solver.eigenvectors();

  // Canonical eigenvector sign and "axis": the largest-magnitude component
  // (first one on ties) is made positive and names the axis.
  std::vector<Eigen::Index> axis(static_cast<std::size_t>(d));
  for (Eigen::Index c = 0; c < d; ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index r = 1; r < d; ++r) {
      if (std::abs(vectors(r, c)) > std::abs(vectors(best, c))) best = r;
    }
    if (vectors(best, c) < 0.0) vectors.col(c) *= -1.0;
    axis[static_cast<std::size_t>(c)] = best;
  }

  // Descending eigenvalues; runs of tied values are ordered by ascending axis.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  const double top = std::max(values.cwiseAbs().maxCoeff(), 0.0);
  const double tie_tol = 1e-12 * top;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t stop = start + 1;
    while (stop < order.size() && values(order[start]) - values(order[stop]) <= tie_tol) ++stop;
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(start),
              order.begin() + static_cast<std::ptrdiff_t>(stop),
              [&](Eigen::Index a, Eigen::Index b) {
                return axis[static_cast<std::size_t>(a)] < axis[static_cast<std::size_t>(b)];
              });
    start = stop;
  }

  Eigen::VectorXd lambda(d);
  Eigen::MatrixXd basis(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    lambda(i) = std::max(values(order[static_cast<std::size_t>(i)]), 0.0);
    basis.col(i) = vectors.col(order[static_cast<std::size_t>(i)]);
  }
  const double total = lambda.sum();
  if (!(total > 0.0)) ThrowNumeric("all covariance eigenvalues are zero");

  Eigen::Index q = d;
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    cumulative += lambda(i);
    if (cumulative / total >= variance_threshold) {
      q = i + 1;
      break;
    }
  }
  q = std::clamp<Eigen::Index>(q, 1, d - 1);

  double sigma2 = lambda.tail(d - q).mean();
  sigma2 = std::max(sigma2, 1e-10 * lambda(0));

  Eigen::MatrixXd weight(d, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    weight.col(i) = basis.col(i) * std::sqrt(std::max(lambda(i) - sigma2, 0.0));
  }
  Eigen::MatrixXd inner = weight.transpose() * weight;
  inner.diagonal().array() += sigma2;
  Eigen::LLT<Eigen::MatrixXd> llt(inner);
  if (llt.info() != Eigen::Success) ThrowNumeric("PPCA inner system is not positive definite");

  PpcaModel model;
  model.mean_ = std::move(stats.mean);
  model.weight_ = std::move(weight);
  model.axes_ = basis.leftCols(q);
  model.inner_cholesky_lower_ = llt.matrixL();
  model.eigenvalues_ = std::move(lambda);
  model.residual_variance_ = sigma2;
  model.log_det_ = log_det_from_cholesky(model.inner_cholesky_lower_) +
                   static_cast<double>(d - q) * std::log(sigma2);
  model.explained_fraction_ = model.eigenvalues_.head(q).sum() / total;
  model.variance_threshold_ = variance_threshold;
  return model;
}

double PpcaModel::score_one(std::span<const float> z) const {
  // Woodbury: r^T C^-1 r = (r^T r - b^T M^-1 b) / sigma^2 with b = W^T r.
  const Eigen::VectorXd centered = to_vector(z) - mean_;
  const Eigen::VectorXd projected = weight_.transpose() * centered;
  const Eigen::VectorXd solved =
      inner_cholesky_lower_.triangularView<Eigen::Lower>().solve(projected);
  const double quad = (centered.squaredNorm() - solved.squaredNorm()) / residual_variance_;
  return -0.5 * (log_det_ + quad + static_cast<double>(dim()) * kLog2Pi);
}

ScoreVector PpcaModel::score(const EmbeddingMatrix& queries, int threads) const {
  check_query_dim(dim(), queries);
  return score_rows(queries, threads, [this](std::span<const float> z) { return score_one(z); });
}

// ---------------------------------------------------------------------------
// k-NN

KnnIndex::KnnIndex(EmbeddingMatrix reference, std::size_t k)
    : reference_(std::move(reference)), k_(k) {
  if (k_ < 1 || k_ + 1 > reference_.rows()) {
    ThrowValidation("k out of range: k=" + std::to_string(k_) + " requires 1 <= k <= n-1 with n=" +
                    std::to_string(reference_.rows()));
  }
}

ScoreVector KnnIndex::score(const EmbeddingMatrix& queries, bool queries_are_reference,
                            int threads) const {
  auto dist = kth_neighbor_distances(queries, reference_, k_, queries_are_reference, threads);
  for (auto& v : dist) v = -v;
  return ScoreVector(std::move(dist));
}

// ---------------------------------------------------------------------------

GaussianModel fit_gaussian(const EmbeddingMatrix& data, double regularization) {
  return GaussianModel::fit(data, regularization);
}
ScoreVector score_gaussian(const GaussianModel& model, const EmbeddingMatrix& queries,
                           int threads) {
  return model.score(queries, threads);
}
PpcaModel fit_ppca(const EmbeddingMatrix& data, double variance_threshold) {
  return PpcaModel::fit(data, variance_threshold);
}
ScoreVector score_ppca(const PpcaModel& model, const EmbeddingMatrix& queries, int threads) {
  return model.score(queries, threads);
}
ScoreVector score_knn(const KnnIndex& index, const EmbeddingMatrix& queries,
                      bool queries_are_reference, int threads) {
  return index.score(queries, queries_are_reference, threads);
}

std::string to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kGaussian:
      return "gaussian";
    case ScorerKind::kPpca:
      return "ppca";
    case ScorerKind::kKnn:
      return "knn";
  }
  return "unknown";
}

ScorerKind parse_scorer_kind(const std::string& name) {
  if (name == "gaussian") return ScorerKind::kGaussian;
  if (name == "ppca") return ScorerKind::kPpca;
  if (name == "knn") return ScorerKind::kKnn;
  ThrowValidation("unknown scorer: " + name);
}

ScoreVector fit_and_score(const EmbeddingMatrix& data, const ScorerConfig& config,
                          int threads) {
  switch (config.kind) {
    case ScorerKind::kGaussian:
      return GaussianModel::fit(data, config.regularization).score(data, threads);
    case ScorerKind::kPpca:
      return PpcaModel::fit(data, config.variance_threshold).score(data, threads);
    case ScorerKind::kKnn:
      return KnnIndex(data, config.k).score(data, true, threads);
  }
  ThrowValidation("unknown scorer");
}

}  // namespace curator
