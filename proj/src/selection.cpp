#include "curator/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "curator/error.hpp"

namespace curator {

namespace {

// ceil(ratio * n), treating products within rounding noise of an integer as
// that integer (0.7 * 10 must give 7, not 8).
std::size_t retention_count(double ratio, std::size_t n) {
  const double x = ratio * static_cast<double>(n);
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, x)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(x));
}

void check_config(const SelectionConfig& config) {
  if (config.retention_ratio.has_value() == config.threshold.has_value()) {
    ThrowValidation("exactly one of retention ratio or threshold must be set");
  }
  if (config.retention_ratio) {
    const double r = *config.retention_ratio;
    if (!(r > 0.0 && r <= 1.0)) ThrowValidation("retention ratio must lie in (0, 1]");
  }
  if (config.threshold && !std::isfinite(*config.threshold)) {
    ThrowValidation("threshold must be finite");
  }
}

// Positions (into `scores`) kept by the configured cut, plus the realized
// threshold.
std::pair<std::vector<std::size_t>, double> cut(std::span<const double> scores,
                                                const SelectionConfig& config) {
  if (config.retention_ratio) {
    auto kept = top_fraction(scores, *config.retention_ratio);
    double lowest = scores[kept.front()];
    for (std::size_t i : kept) lowest = std::min(lowest, scores[i]);
    return {std::move(kept), lowest};
  }
  const double psi = *config.threshold;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > psi) kept.push_back(i);
  }
  return {std::move(kept), psi};
}

}  // namespace

SelectionConfig SelectionConfig::retention(double ratio, SelectionScope scope,
                                           ScorerConfig scorer) {
  SelectionConfig c;
  c.retention_ratio = ratio;
  c.scope = scope;
  c.scorer = scorer;
  return c;
}

SelectionConfig SelectionConfig::with_threshold(double psi, SelectionScope scope,
                                                ScorerConfig scorer) {
  SelectionConfig c;
  c.threshold = psi;
  c.scope = scope;
  c.scorer = scorer;
  return c;
}

std::vector<std::size_t> top_fraction(std::span<const double> scores, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) ThrowValidation("retention ratio must lie in (0, 1]");
  if (scores.empty()) ThrowValidation("cannot select from an empty score vector");
  const std::size_t keep = std::max<std::size_t>(1, retention_count(ratio, scores.size()));
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep - 1),
                   order.end(), better);
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

ScoreVector score_with_scope(const EmbeddingMatrix& matrix, const ScorerConfig& scorer,
                             SelectionScope scope, int threads) {
  if (scope == SelectionScope::kGlobal) return fit_and_score(matrix, scorer, threads);

  std::vector<double> scores(matrix.rows());
  for (const auto& [label, indices] : partition_indices_by_label(matrix)) {
    try {
      const auto class_scores = fit_and_score(matrix.take_rows(indices), scorer, threads);
      for (std::size_t i = 0; i < indices.size(); ++i) scores[indices[i]] = class_scores[i];
    } catch (const Error& e) {
      throw Error(e.kind(), "class " + std::to_string(label) + ": " + e.what());
    }
  }
  return ScoreVector(std::move(scores));
}

SelectionResult select_from_scores(const ScoreVector& scores,
                                   const std::optional<std::vector<std::int32_t>>& labels,
                                   const SelectionConfig& config) {
  check_config(config);
  const std::size_t n = scores.size();
  if (n == 0) ThrowValidation("cannot select from an empty score vector");

  SelectionResult result;
  if (config.scope == SelectionScope::kGlobal) {
    auto [kept, psi] = cut(scores.values(), config);
    result.kept_indices = std::move(kept);
    result.realized_threshold[kGlobalScopeKey] = psi;
  } else {
    if (!labels) ThrowValidation("labels required for per-class selection");
    if (labels->size() != n) ThrowValidation("label count does not match score count");
    std::map<std::int32_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[(*labels)[i]].push_back(i);
    for (const auto& [label, indices] : groups) {
      std::vector<double> class_scores;
      class_scores.reserve(indices.size());
      for (std::size_t i : indices) class_scores.push_back(scores[i]);
      auto [kept, psi] = cut(class_scores, config);
      for (std::size_t pos : kept) result.kept_indices.push_back(indices[pos]);
      result.realized_threshold[label] = psi;
    }
    std::sort(result.kept_indices.begin(), result.kept_indices.end());
  }
  if (result.kept_indices.empty()) {
    ThrowValidation("threshold keeps no rows (every score <= threshold)");
  }
  result.retention_achieved =
      static_cast<double>(result.kept_indices.size()) / static_cast<double>(n);
  result.scores = scores;
  return result;
}

SelectionResult select(const EmbeddingMatrix& matrix, const SelectionConfig& config,
                       int threads) {
  check_config(config);
  if (config.scope == SelectionScope::kPerClass && !matrix.has_labels()) {
    ThrowValidation("labels required for per-class selection");
  }
  const auto scores = score_with_scope(matrix, config.scorer, config.scope, threads);
  return select_from_scores(scores, matrix.maybe_labels(), config);
}

Subset materialize_subset(const EmbeddingMatrix& matrix, const Manifest& manifest,
                          const SelectionResult& result) {
  if (manifest.size() != matrix.rows()) {
    ThrowValidation("manifest has " + std::to_string(manifest.size()) + " entries for " +
                    std::to_string(matrix.rows()) + " rows");
  }
  for (std::size_t i = 0; i < result.kept_indices.size(); ++i) {
    if (result.kept_indices[i] >= matrix.rows()) {
      ThrowValidation("kept index " + std::to_string(result.kept_indices[i]) +
                      " out of range");
    }
    if (i > 0 && result.kept_indices[i] <= result.kept_indices[i - 1]) {
      ThrowValidation("kept indices are not strictly increasing");
    }
  }
  return Subset{matrix.take_rows(result.kept_indices), manifest.take(result.kept_indices)};
}

std::string to_string(SelectionScope scope) {
  return scope == SelectionScope::kGlobal ? "global" : "per-class";
}

SelectionScope parse_scope(const std::string& name) {
  if (name == "global") return SelectionScope::kGlobal;
  if (name == "per-class" || name == "per_class") return SelectionScope::kPerClass;
  ThrowValidation("unknown scope: " + name);
}

}  // namespace curator
