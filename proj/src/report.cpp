#include "curator/report.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>

#include "curator/error.hpp"

namespace curator {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_scores_csv(const ScoreVector& scores, const Manifest* manifest, std::ostream& out) {
  if (manifest && manifest->size() != scores.size()) {
    ThrowValidation("manifest size does not match score count");
  }
  out << "index,identifier,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out << i << ',';
    if (manifest) {
      const auto& id = (*manifest)[i];
      // Quote identifiers that would break the column layout.
      if (id.find_first_of(",\"\r") != std::string::npos) {
        out << '"';
        for (char c : id) {
          if (c == '"') out << '"';
          out << c;
        }
        out << '"';
      } else {
        out << id;
      }
    }
    out << ',' << format_double(scores[i]) << '\n';
  }
  if (!out) ThrowIo("failed to write scores CSV");
}

Json scorer_parameters(const ScorerConfig& config) {
  Json p = Json::object();
  switch (config.kind) {
    case ScorerKind::kGaussian:
      p["reg"] = config.regularization;
      break;
    case ScorerKind::kPpca:
      p["variance"] = config.variance_threshold;
      break;
    case ScorerKind::kKnn:
      p["k"] = config.k;
      break;
  }
  return p;
}

Json scores_summary(const ScoreVector& scores, const std::string& model_type,
                    const Json& parameters, std::size_t d) {
  const auto& v = scores.values();
  double sum = 0.0;
  for (double s : v) sum += s;
  Json j;
  j["model_type"] = model_type;
  j["parameters"] = parameters;
  j["n"] = v.size();
  j["d"] = d;
  j["score_min"] = v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
  j["score_max"] = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  j["score_mean"] = v.empty() ? 0.0 : sum / static_cast<double>(v.size());
  return j;
}

Json selection_summary(const SelectionResult& result, const SelectionConfig& config) {
  Json cfg;
  cfg["scorer"] = to_string(config.scorer.kind);
  cfg["parameters"] = scorer_parameters(config.scorer);
  cfg["scope"] = to_string(config.scope);
  if (config.retention_ratio) {
    cfg["mode"] = "retention";
    cfg["retention"] = *config.retention_ratio;
  } else {
    cfg["mode"] = "threshold";
    cfg["threshold"] = *config.threshold;
  }

  Json j;
  j["config"] = cfg;
  if (config.scope == SelectionScope::kGlobal) {
    j["realized_threshold"] = result.realized_threshold.at(kGlobalScopeKey);
  } else {
    Json per_class = Json::object();
    for (const auto& [label, psi] : result.realized_threshold) {
      per_class[std::to_string(label)] = psi;
    }
    j["realized_thresholds"] = per_class;
  }
  j["retention_achieved"] = result.retention_achieved;
  j["n_kept"] = result.kept_indices.size();
  j["n_total"] = result.scores.size();
  return j;
}

Json metric_json(const MetricReport& r) {
  Json j;
  j["metric"] = r.name;
  j["value"] = r.value;
  j["std"] = r.std ? Json(*r.std) : Json(nullptr);
  j["n_real"] = r.n_real;
  j["n_gen"] = r.n_gen;
  j["k"] = r.k ? Json(*r.k) : Json(nullptr);
  j["splits"] = r.splits ? Json(*r.splits) : Json(nullptr);
  j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
  if (r.warning) j["warning"] = *r.warning;
  return j;
}

void write_metrics_csv(const std::vector<MetricReport>& reports, std::ostream& out) {
  out << "metric,value,std,n_real,n_gen,k,splits,seed\n";
  for (const auto& r : reports) {
    out << r.name << ',' << format_double(r.value) << ',';
    if (r.std) out << format_double(*r.std);
    out << ',' << r.n_real << ',' << r.n_gen << ',';
    if (r.k) out << *r.k;
    out << ',';
    if (r.splits) out << *r.splits;
    out << ',';
    if (r.seed) out << *r.seed;
    out << '\n';
  }
  if (!out) ThrowIo("failed to write metrics CSV");
}

void write_json(const Json& value, std::ostream& out) {
  out << value.dump(2) << '\n';
  if (!out) ThrowIo("failed to write JSON");
}

}  // namespace curator
