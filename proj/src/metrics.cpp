#include "curator/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "curator/error.hpp"
#include "curator/neighbors.hpp"
#include "curator/parallel.hpp"
#include "curator/stats.hpp"

namespace curator {

namespace {

constexpr double kRowSumTolerance = 1e-5;

void check_same_dim(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  if (a.cols() != b.cols()) {
    ThrowValidation("dimension mismatch: " + std::to_string(a.cols()) + " vs " +
                    std::to_string(b.cols()));
  }
}

// Symmetric PSD square root by eigen-clamping.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) ThrowNumeric("eigendecomposition failed");
  const Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace

ProbabilityMatrix::ProbabilityMatrix(EmbeddingMatrix probs) : probs_(std::move(probs)) {
  for (std::size_t i = 0; i < probs_.rows(); ++i) {
    double sum = 0.0;
    for (float p : probs_.row(i)) {
      if (p < 0.0f) ThrowValidation("negative probability in row " + std::to_string(i));
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      ThrowValidation("probability row " + std::to_string(i) + " sums to " +
                      std::to_string(sum));
    }
  }
}

MetricReport inception_score(const ProbabilityMatrix& probs, std::size_t splits) {
  const std::size_t n = probs.rows();
  const std::size_t c = probs.classes();
  if (splits < 1) ThrowValidation("splits must be >= 1");
  if (n < splits) {
    ThrowValidation("need at least as many rows as splits (" + std::to_string(n) + " < " +
                    std::to_string(splits) + ")");
  }

  std::vector<double> per_split;
  per_split.reserve(splits);
  const std::size_t base = n / splits;
  const std::size_t extra = n % splits;
  std::size_t begin = 0;
  for (std::size_t s = 0; s < splits; ++s) {
    const std::size_t size = base + (s < extra ? 1 : 0);
    const std::size_t end = begin + size;

    std::vector<double> marginal(c, 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      auto row = probs.row(i);
      for (std::size_t j = 0; j < c; ++j) marginal[j] += row[j];
    }
    for (auto& m : marginal) m /= static_cast<double>(size);

    double kl_sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      auto row = probs.row(i);
      for (std::size_t j = 0; j < c; ++j) {
        const double p = row[j];
        if (p > 0.0) kl_sum += p * (std::log(p) - std::log(marginal[j]));
      }
    }
    per_split.push_back(std::exp(kl_sum / static_cast<double>(size)));
    begin = end;
  }

  double mean = 0.0;
  for (double v : per_split) mean += v;
  mean /= static_cast<double>(splits);
  double var = 0.0;
  for (double v : per_split) var += (v - mean) * (v - mean);
  var /= static_cast<double>(splits);

  MetricReport report;
  report.name = "IS";
  report.value = mean;
  report.std = std::sqrt(var);
  report.n_gen = n;
  report.splits = splits;
  return report;
}

GaussianSummary gaussian_summary(const EmbeddingMatrix& features) {
  auto stats = sample_mean_covariance(features);
  return GaussianSummary{std::move(stats.mean), std::move(stats.covariance), features.rows()};
}

MetricReport frechet_distance(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.mean.size() != b.mean.size() || a.covariance.rows() != b.covariance.rows() ||
      a.covariance.rows() != a.mean.size()) {
    ThrowValidation("dimension mismatch between Gaussian summaries");
  }
  const Eigen::MatrixXd root_a = psd_sqrt(a.covariance);
  Eigen::MatrixXd inner = root_a * b.covariance * root_a;
  inner = 0.5 * (inner + inner.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(inner, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) ThrowNumeric("eigendecomposition failed");
  const Eigen::VectorXd& eig = solver.eigenvalues();

  MetricReport report;
  report.name = "FID";
  const double largest = eig.maxCoeff();
  const double smallest = eig.minCoeff();
  if (smallest < -1e-6 * std::max(largest, 0.0)) {
    std::ostringstream os;
    os << "ill-conditioned covariance product: eigenvalue " << smallest
       << " clamped to 0 (largest " << largest << ")";
    report.warning = os.str();
  }
  const double trace_root = eig.cwiseMax(0.0).cwiseSqrt().sum();
  double value = (a.mean - b.mean).squaredNorm() + a.covariance.trace() +
                 b.covariance.trace() - 2.0 * trace_root;
  if (!std::isfinite(value)) ThrowNumeric("non-finite Frechet distance");
  report.value = std::max(value, 0.0);
  report.n_real = a.n_source;
  report.n_gen = b.n_source;
  return report;
}

ManifoldRadii manifold_radii(const EmbeddingMatrix& set, std::size_t k, int threads) {
  if (k < 1 || k >= set.rows()) {
    ThrowValidation("k out of range: k=" + std::to_string(k) + " requires 1 <= k <= n-1 with n=" +
                    std::to_string(set.rows()));
  }
  return ManifoldRadii{kth_neighbor_distances(set, set, k, true, threads), k};
}

double manifold_membership(const EmbeddingMatrix& points, const EmbeddingMatrix& manifold,
                           const ManifoldRadii& radii, int threads) {
  check_same_dim(points, manifold);
  if (radii.radii.size() != manifold.rows()) ThrowValidation("radii do not match manifold");
  std::vector<unsigned char> inside(points.rows(), 0);
  parallel_for(points.rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      for (std::size_t i = 0; i < manifold.rows(); ++i) {
        if (euclidean_distance(points.row(j), manifold.row(i)) <= radii.radii[i]) {
          inside[j] = 1;
          break;
        }
      }
    }
  });
  std::size_t count = 0;
  for (auto v : inside) count += v;
  return static_cast<double>(count) / static_cast<double>(points.rows());
}

MetricPair precision_recall(const EmbeddingMatrix& real, const EmbeddingMatrix& generated,
                            std::size_t k, int threads) {
  check_same_dim(real, generated);
  const auto real_radii = manifold_radii(real, k, threads);
  const auto gen_radii = manifold_radii(generated, k, threads);

  MetricPair out;
  out.first.name = "precision";
  out.first.value = manifold_membership(generated, real, real_radii, threads);
  out.second.name = "recall";
  out.second.value = manifold_membership(real, generated, gen_radii, threads);
  for (auto* r : {&out.first, &out.second}) {
    r->n_real = real.rows();
    r->n_gen = generated.rows();
    r->k = k;
  }
  return out;
}

MetricPair density_coverage(const EmbeddingMatrix& real, const EmbeddingMatrix& generated,
                            std::size_t k, int threads) {
  check_same_dim(real, generated);
  const auto radii = manifold_radii(real, k, threads);
  const std::size_t n = real.rows();
  const std::size_t m = generated.rows();

  // Per generated point: number of real balls containing it.
  std::vector<std::size_t> hits(m, 0);
  parallel_for(m, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        if (euclidean_distance(generated.row(j), real.row(i)) <= radii.radii[i]) ++hits[j];
      }
    }
  });
  std::vector<unsigned char> covered(n, 0);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (euclidean_distance(generated.row(j), real.row(i)) <= radii.radii[i]) {
          covered[i] = 1;
          break;
        }
      }
    }
  });

  std::size_t total_hits = 0;
  for (auto h : hits) total_hits += h;
  std::size_t covered_count = 0;
  for (auto c : covered) covered_count += c;

  MetricPair out;
  out.first.name = "density";
  out.first.value =
      static_cast<double>(total_hits) / (static_cast<double>(k) * static_cast<double>(m));
  out.second.name = "coverage";
  out.second.value = static_cast<double>(covered_count) / static_cast<double>(n);
  for (auto* r : {&out.first, &out.second}) {
    r->n_real = n;
    r->n_gen = m;
    r->k = k;
  }
  return out;
}

}  // namespace curator
