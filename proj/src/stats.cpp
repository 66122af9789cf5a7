#include "curator/stats.hpp"

#include <string>

#include "curator/error.hpp"

namespace curator {

Eigen::VectorXd to_vector(std::span<const float> row) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(row.size()));
  for (std::size_t j = 0; j < row.size(); ++j) v(static_cast<Eigen::Index>(j)) = row[j];
  return v;
}

MeanCovariance sample_mean_covariance(const EmbeddingMatrix& data) {
  const auto n = static_cast<Eigen::Index>(data.rows());
  const auto d = static_cast<Eigen::Index>(data.cols());
  if (n < 2) {
    ThrowValidation("at least 2 rows required to estimate a covariance, got " +
                    std::to_string(n));
  }
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto row = data.row(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = row[static_cast<std::size_t>(j)];
  }
  MeanCovariance out;
  out.mean = x.colwise().mean().transpose();
  x.rowwise() -= out.mean.transpose();
  Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  out.covariance = 0.5 * (cov + cov.transpose());
  return out;
}

}  // namespace curator
