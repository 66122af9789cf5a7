#pragma once

// Seeded synthetic data for tests. Everything here is deterministic for a
// given seed and independent of the library's sampling code.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/QR>

#include "curator/embedding.hpp"

namespace curator::testing {

class Normal {
 public:
  explicit Normal(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  std::uint64_t bits() { return rng_(); }

 private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline EmbeddingMatrix matrix_from_rows(const std::vector<std::vector<float>>& rows,
                                        std::optional<std::vector<std::int32_t>> labels = {}) {
  std::vector<float> data;
  for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return EmbeddingMatrix(rows.size(), rows.front().size(), std::move(data), std::move(labels));
}

inline EmbeddingMatrix column_matrix(const std::vector<float>& values) {
  return EmbeddingMatrix(values.size(), 1, values);
}

// i.i.d. N(offset, scale^2) entries.
inline EmbeddingMatrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed,
                                     double scale = 1.0, double offset = 0.0) {
  Normal normal(seed);
  std::vector<float> data(n * d);
  for (auto& v : data) v = static_cast<float>(offset + scale * normal());
  return EmbeddingMatrix(n, d, std::move(data));
}

// Rows drawn from N(mean, L L^T).
inline EmbeddingMatrix gaussian_draw(const Eigen::VectorXd& mean, const Eigen::MatrixXd& lower,
                                     std::size_t n, std::uint64_t seed,
                                     std::optional<std::int32_t> label = {}) {
  Normal normal(seed);
  const auto d = mean.size();
  std::vector<float> data;
  data.reserve(n * static_cast<std::size_t>(d));
  Eigen::VectorXd z(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(j) = normal();
    const Eigen::VectorXd x = mean + lower * z;
    for (Eigen::Index j = 0; j < d; ++j) data.push_back(static_cast<float>(x(j)));
  }
  std::optional<std::vector<std::int32_t>> labels;
  if (label) labels = std::vector<std::int32_t>(n, *label);
  return EmbeddingMatrix(n, static_cast<std::size_t>(d), std::move(data), std::move(labels));
}

// Random well-conditioned invertible matrix: identity plus a scaled Gaussian
// perturbation, rejected until |det| is comfortably nonzero.
inline Eigen::MatrixXd random_invertible(std::size_t d, std::uint64_t seed) {
  Normal normal(seed);
  for (;;) {
    Eigen::MatrixXd a(d, d);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = 0.5 * normal();
    a += Eigen::MatrixXd::Identity(d, d) * 1.5;
    if (std::abs(a.determinant()) > 0.1) return a;
  }
}

// Random rotation via QR of a Gaussian matrix.
inline Eigen::MatrixXd random_rotation(std::size_t d, std::uint64_t seed) {
  Normal normal(seed);
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ();
}

// Applies z -> A z + b to every row; the result is rounded back to float.
inline EmbeddingMatrix affine_map(const EmbeddingMatrix& m, const Eigen::MatrixXd& a,
                                  const Eigen::VectorXd& b) {
  std::vector<float> out;
  out.reserve(m.rows() * m.cols());
  Eigen::VectorXd z(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) z(static_cast<Eigen::Index>(j)) = m.at(i, j);
    const Eigen::VectorXd y = a * z + b;
    for (Eigen::Index j = 0; j < y.size(); ++j) out.push_back(static_cast<float>(y(j)));
  }
  return EmbeddingMatrix(m.rows(), m.cols(), std::move(out), m.maybe_labels());
}

inline EmbeddingMatrix concat_rows(const std::vector<EmbeddingMatrix>& parts) {
  std::vector<float> data;
  std::vector<std::int32_t> labels;
  bool labeled = true;
  for (const auto& p : parts) {
    data.insert(data.end(), p.data().begin(), p.data().end());
    if (p.has_labels()) {
      labels.insert(labels.end(), p.labels().begin(), p.labels().end());
    } else {
      labeled = false;
    }
  }
  const std::size_t d = parts.front().cols();
  const std::size_t rows = data.size() / d;
  std::optional<std::vector<std::int32_t>> l;
  if (labeled) l = std::move(labels);
  return EmbeddingMatrix(rows, d, std::move(data), std::move(l));
}

struct SyntheticStudy {
  EmbeddingMatrix real;
  EmbeddingMatrix generated;
};

// `classes` Gaussian classes whose spread grows with the class id. The
// "generated" side of each class is an independent same-size draw from a
// Gaussian refit to that class's real rows.
inline SyntheticStudy make_synthetic_study(std::size_t classes, std::size_t d, std::size_t n,
                                           std::uint64_t seed) {
  std::vector<EmbeddingMatrix> real_parts, gen_parts;
  Normal normal(seed);
  for (std::size_t c = 0; c < classes; ++c) {
    const double spread = 0.5 + 0.1 * static_cast<double>(c);
    Eigen::VectorXd mean(d);
    for (Eigen::Index j = 0; j < mean.size(); ++j) mean(j) = 5.0 * normal();
    Eigen::MatrixXd mix(d, d);
    for (Eigen::Index i = 0; i < mix.rows(); ++i)
      for (Eigen::Index j = 0; j < mix.cols(); ++j) mix(i, j) = 0.3 * normal();
    mix += Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd lower = spread * mix;
    const auto label = static_cast<std::int32_t>(c);
    auto real = gaussian_draw(mean, lower, n, seed * 1000 + 2 * c + 1, label);

    // Refit on the real draw, then sample the proxy "generator".
    Eigen::MatrixXd x(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) x(i, j) = real.at(i, j);
    const Eigen::VectorXd mu = x.colwise().mean().transpose();
    x.rowwise() -= mu.transpose();
    const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(n - 1);
    const Eigen::MatrixXd fit_lower = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
    gen_parts.push_back(gaussian_draw(mu, fit_lower, n, seed * 1000 + 2 * c + 2, label));
    real_parts.push_back(std::move(real));
  }
  return {concat_rows(real_parts), concat_rows(gen_parts)};
}

// Covariance eigenvalues (2, 0.05) along the coordinate axes, mean 0.
inline EmbeddingMatrix two_eigenvalue_fixture() {
  const float b = std::sqrt(0.1f);
  return matrix_from_rows({{2.f, 0.f}, {-2.f, 0.f}, {0.f, b}, {0.f, -b}, {0.f, 0.f}});
}

// Three 1-D classes. Class c is e^c * {-2,-1,0,1,2}; its generated side is the
// same points shifted by sqrt(c+1). The mean Gaussian score of class c is then
// const - c and its FID is c+1, an exactly decreasing affine relation.
inline SyntheticStudy affine_study() {
  std::vector<float> real, gen;
  std::vector<std::int32_t> labels;
  for (int c = 0; c < 3; ++c) {
    for (int v = -2; v <= 2; ++v) {
      const double x = std::exp(c) * v;
      real.push_back(static_cast<float>(x));
      gen.push_back(static_cast<float>(x + std::sqrt(c + 1.0)));
      labels.push_back(c);
    }
  }
  const auto n = labels.size();
  return {EmbeddingMatrix(n, 1, std::move(real), labels),
          EmbeddingMatrix(n, 1, std::move(gen), labels)};
}

}  // namespace curator::testing
