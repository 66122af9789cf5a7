#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "curator/density.hpp"
#include "curator/embedding.hpp"

namespace curator {

enum class SelectionScope { kGlobal, kPerClass };

struct SelectionConfig {
  // Exactly one of these is set.
  std::optional<double> retention_ratio;  // in (0, 1]
  std::optional<double> threshold;        // keep score > threshold
  SelectionScope scope = SelectionScope::kGlobal;
  ScorerConfig scorer;

  static SelectionConfig retention(double ratio, SelectionScope scope, ScorerConfig scorer);
  static SelectionConfig with_threshold(double psi, SelectionScope scope, ScorerConfig scorer);
};

struct SelectionResult {
  std::vector<std::size_t> kept_indices;  // strictly increasing
  // Global scope: a single entry keyed by -1. Per-class scope: one per class.
  std::map<std::int32_t, double> realized_threshold;
  double retention_achieved = 0.0;
  ScoreVector scores;
};

inline constexpr std::int32_t kGlobalScopeKey = -1;

// Keeps the ceil(ratio * n) highest scores, ties broken toward the lower row
// index. Throws if the ratio is outside (0, 1].
std::vector<std::size_t> top_fraction(std::span<const double> scores, double ratio);

// Scores (global or per-class fits) and applies the cut.
SelectionResult select(const EmbeddingMatrix& matrix, const SelectionConfig& config,
                       int threads = 1);

// Applies the cut to precomputed scores; `labels` is required for per-class
// scope. The scorer part of `config` is ignored.
SelectionResult select_from_scores(const ScoreVector& scores,
                                   const std::optional<std::vector<std::int32_t>>& labels,
                                   const SelectionConfig& config);

// Scores every row under the configured scope: one fit over all rows, or one
// fit per class applied to that class's rows.
ScoreVector score_with_scope(const EmbeddingMatrix& matrix, const ScorerConfig& scorer,
                             SelectionScope scope, int threads = 1);

struct Subset {
  EmbeddingMatrix matrix;
  Manifest manifest;
};

Subset materialize_subset(const EmbeddingMatrix& matrix, const Manifest& manifest,
                          const SelectionResult& result);

std::string to_string(SelectionScope scope);
SelectionScope parse_scope(const std::string& name);

}  // namespace curator
