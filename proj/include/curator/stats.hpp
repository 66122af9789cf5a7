#pragma once

#include <span>

#include <Eigen/Core>

#include "curator/embedding.hpp"

namespace curator {

struct MeanCovariance {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // divisor n - 1, exactly symmetric
};

// Requires n >= 2.
MeanCovariance sample_mean_covariance(const EmbeddingMatrix& data);

Eigen::VectorXd to_vector(std::span<const float> row);

}  // namespace curator
