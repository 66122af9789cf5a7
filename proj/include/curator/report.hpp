#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "curator/density.hpp"
#include "curator/embedding.hpp"
#include "curator/metrics.hpp"
#include "curator/selection.hpp"

namespace curator {

using Json = nlohmann::ordered_json;

// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

// `index,identifier,score`; identifier empty without a manifest.
void write_scores_csv(const ScoreVector& scores, const Manifest* manifest, std::ostream& out);

Json scores_summary(const ScoreVector& scores, const std::string& model_type,
                    const Json& parameters, std::size_t d);

Json scorer_parameters(const ScorerConfig& config);

Json selection_summary(const SelectionResult& result, const SelectionConfig& config);

Json metric_json(const MetricReport& report);
// `metric,value,std,n_real,n_gen,k,splits,seed`, header included.
void write_metrics_csv(const std::vector<MetricReport>& reports, std::ostream& out);

// Pretty-printed with a trailing newline.
void write_json(const Json& value, std::ostream& out);

}  // namespace curator
