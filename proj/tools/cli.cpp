#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "curator/density.hpp"
#include "curator/embedding.hpp"
#include "curator/error.hpp"
#include "curator/metrics.hpp"
#include "curator/report.hpp"
#include "curator/sampling.hpp"
#include "curator/selection.hpp"
#include "curator/study.hpp"

namespace curator::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSelectionSidecar = "selection.json";
constexpr const char* kKeptEmbeddings = "kept.emb1";
constexpr const char* kKeptManifest = "kept.manifest";

int default_threads() {
  if (const char* env = std::getenv("CURATOR_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 1) return t;
    } catch (const std::exception&) {
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct ScorerFlags {
  std::string scorer;
  std::string scope;
  std::size_t k = kDefaultNeighbors;
  double variance = kDefaultVarianceThreshold;
  double reg = kDefaultRegularization;

  ScorerConfig config() const {
    ScorerConfig c;
    c.kind = parse_scorer_kind(scorer);
    c.k = k;
    c.variance_threshold = variance;
    c.regularization = reg;
    return c;
  }
};

void add_scorer_flags(CLI::App* cmd, ScorerFlags& flags, bool with_scope) {
  cmd->add_option("--scorer", flags.scorer, "Density scorer")
      ->required()
      ->check(CLI::IsMember({"gaussian", "ppca", "knn"}));
  if (with_scope) {
    cmd->add_option("--scope", flags.scope, "Fit one model globally or one per class")
        ->required()
        ->check(CLI::IsMember({"global", "per-class"}));
  }
  cmd->add_option("--k", flags.k, "Neighbour count for knn")->capture_default_str();
  cmd->add_option("--variance", flags.variance, "Retained-variance fraction for ppca")
      ->capture_default_str();
  cmd->add_option("--reg", flags.reg, "Relative covariance ridge for gaussian")
      ->capture_default_str();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) ThrowIo("cannot open " + path.string() + " for writing");
  return f;
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) ThrowIo("cannot create output directory " + dir.string());
}

// Explicit --manifest, else `<stem>.manifest` beside the input if present.
std::optional<Manifest> load_input_manifest(const fs::path& input, const std::string& flag,
                                            std::size_t rows) {
  fs::path path = flag.empty() ? manifest_path_for(input) : fs::path(flag);
  if (flag.empty() && !fs::exists(path)) return std::nullopt;
  auto manifest = load_manifest(path);
  if (manifest.size() != rows) {
    ThrowValidation("manifest " + path.string() + " has " + std::to_string(manifest.size()) +
                    " entries for " + std::to_string(rows) + " rows");
  }
  return manifest;
}

Manifest row_index_manifest(std::size_t rows) {
  std::vector<std::string> ids;
  ids.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) ids.push_back(std::to_string(i));
  return Manifest(std::move(ids));
}

bool is_curated(const fs::path& reference) {
  const auto sidecar = reference.parent_path() / kSelectionSidecar;
  if (!fs::exists(sidecar)) return false;
  std::ifstream in(sidecar);
  const auto j = Json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return false;
  return j.value("curated", false) &&
         j.value("kept_embeddings", std::string()) == reference.filename().string();
}

struct ScoreOptions {
  std::string input, manifest, out;
  ScorerFlags scorer;
  int threads = 1;
};

void cmd_score(const ScoreOptions& o) {
  const auto matrix = load_embeddings(o.input);
  const auto manifest = load_input_manifest(o.input, o.manifest, matrix.rows());
  const auto config = o.scorer.config();
  const auto scope = parse_scope(o.scorer.scope);
  const auto scores = score_with_scope(matrix, config, scope, o.threads);

  prepare_out_dir(o.out);
  {
    auto f = open_output(fs::path(o.out) / "scores.csv");
    write_scores_csv(scores, manifest ? &*manifest : nullptr, f);
  }
  auto summary = scores_summary(scores, to_string(config.kind), scorer_parameters(config),
                                matrix.cols());
  summary["scope"] = to_string(scope);
  auto f = open_output(fs::path(o.out) / "scores.json");
  write_json(summary, f);
}

struct SelectOptions : ScoreOptions {
  std::optional<double> retention;
  std::optional<double> threshold;
};

void cmd_select(const SelectOptions& o) {
  const auto matrix = load_embeddings(o.input);
  const auto manifest = load_input_manifest(o.input, o.manifest, matrix.rows());
  const auto scope = parse_scope(o.scorer.scope);
  const auto scorer = o.scorer.config();
  const auto config = o.retention ? SelectionConfig::retention(*o.retention, scope, scorer)
                                  : SelectionConfig::with_threshold(*o.threshold, scope, scorer);
  const auto result = select(matrix, config, o.threads);
  const auto subset =
      materialize_subset(matrix, manifest ? *manifest : row_index_manifest(matrix.rows()), result);

  const fs::path out(o.out);
  prepare_out_dir(out);
  save_embeddings(subset.matrix, out / kKeptEmbeddings);
  save_manifest(subset.manifest, out / kKeptManifest);
  {
    auto f = open_output(out / "scores.csv");
    write_scores_csv(result.scores, manifest ? &*manifest : nullptr, f);
  }
  auto summary = selection_summary(result, config);
  summary["source"] = fs::path(o.input).filename().string();
  summary["curated"] = true;
  summary["kept_embeddings"] = kKeptEmbeddings;
  summary["kept_manifest"] = kKeptManifest;
  auto f = open_output(out / kSelectionSidecar);
  write_json(summary, f);
}

struct EvaluateOptions {
  std::string reference, candidate, probs, out;
  std::size_t k = kDefaultNeighbors;
  std::size_t n_samples = kDefaultManifoldSamples;
  std::size_t splits = kDefaultSplits;
  std::uint64_t seed = 0;
  int threads = 1;
  bool allow_curated = false;
};

void cmd_evaluate(const EvaluateOptions& o) {
  if (!o.allow_curated && is_curated(o.reference)) {
    ThrowPolicy("reference " + o.reference +
                " is a curated subset; evaluate against the original training distribution "
                "or pass --allow-curated-reference");
  }
  const auto reference = load_embeddings(o.reference);
  const auto candidate = load_embeddings(o.candidate);
  if (reference.cols() != candidate.cols()) {
    ThrowValidation("dimension mismatch: reference d=" + std::to_string(reference.cols()) +
                    ", candidate d=" + std::to_string(candidate.cols()));
  }

  std::vector<MetricReport> reports;
  if (!o.probs.empty()) {
    reports.push_back(inception_score(ProbabilityMatrix(load_embeddings(o.probs)), o.splits));
  }
  reports.push_back(frechet_distance(gaussian_summary(reference), gaussian_summary(candidate)));

  const auto real = subsample(reference, std::min(o.n_samples, reference.rows()),
                              derive_seed(o.seed, 0));
  const auto gen = subsample(candidate, std::min(o.n_samples, candidate.rows()),
                             derive_seed(o.seed, 1));
  auto pr = precision_recall(real, gen, o.k, o.threads);
  auto dc = density_coverage(real, gen, o.k, o.threads);
  for (auto* r : {&pr.first, &pr.second, &dc.first, &dc.second}) {
    r->seed = o.seed;
    reports.push_back(*r);
  }

  const fs::path out(o.out);
  prepare_out_dir(out);
  Json arr = Json::array();
  for (const auto& r : reports) arr.push_back(metric_json(r));
  {
    auto f = open_output(out / "metrics.json");
    write_json(arr, f);
  }
  auto f = open_output(out / "metrics.csv");
  write_metrics_csv(reports, f);
}

struct CorrelateOptions {
  std::string reference, candidate, out;
  ScorerFlags scorer;
  std::size_t n_samples = 700;
  std::uint64_t seed = 0;
  int threads = 1;
};

void cmd_correlate(const CorrelateOptions& o) {
  const auto real = load_embeddings(o.reference);
  const auto generated = load_embeddings(o.candidate);
  StudyConfig config;
  config.scorer = o.scorer.config();
  config.real_cap = o.n_samples;
  config.generated_cap = o.n_samples;
  config.seed = o.seed;
  const auto study = run_study(real, generated, config, o.threads);
  prepare_out_dir(o.out);
  export_study(study.rows, study.correlation, o.out);
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
      return kIoError;
    case ErrorKind::kValidation:
      return kInvalid;
    case ErrorKind::kNumeric:
      return kNumeric;
    case ErrorKind::kPolicy:
      return kPolicy;
  }
  return kInvalid;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Density-based dataset curation and generative-model evaluation"};
  app.name("curator");
  app.require_subcommand(1);

  const int threads_default = default_threads();
  auto add_threads = [&](CLI::App* cmd, int& threads) {
    threads = threads_default;
    cmd->add_option("--threads", threads, "Worker threads (default: $CURATOR_THREADS)")
        ->check(CLI::PositiveNumber);
  };

  ScoreOptions score;
  auto* score_cmd = app.add_subcommand("score", "Score every row with a density model");
  score_cmd->add_option("--input", score.input, "EMB1 embeddings")->required();
  score_cmd->add_option("--manifest", score.manifest, "Row identifiers (default <stem>.manifest)");
  score_cmd->add_option("--out", score.out, "Output directory")->required();
  add_scorer_flags(score_cmd, score.scorer, true);
  add_threads(score_cmd, score.threads);

  SelectOptions sel;
  auto* select_cmd = app.add_subcommand("select", "Keep the densest rows");
  select_cmd->add_option("--input", sel.input, "EMB1 embeddings")->required();
  select_cmd->add_option("--manifest", sel.manifest, "Row identifiers (default <stem>.manifest)");
  select_cmd->add_option("--out", sel.out, "Output directory")->required();
  add_scorer_flags(select_cmd, sel.scorer, true);
  auto* retention_opt =
      select_cmd->add_option("--retention", sel.retention, "Fraction of rows to keep, in (0,1]");
  auto* threshold_opt =
      select_cmd->add_option("--threshold", sel.threshold, "Keep rows scoring above this");
  retention_opt->excludes(threshold_opt);
  add_threads(select_cmd, sel.threads);

  EvaluateOptions eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "IS, FID, precision/recall, density/coverage");
  eval_cmd->add_option("--reference", eval.reference, "Reference (training) embeddings")
      ->required();
  eval_cmd->add_option("--candidate", eval.candidate, "Generated embeddings")->required();
  eval_cmd->add_option("--probs", eval.probs, "Class probabilities of generated samples (EMB1)");
  eval_cmd->add_option("--k", eval.k, "Neighbour count for the manifold metrics")
      ->capture_default_str();
  eval_cmd->add_option("--n-samples", eval.n_samples,
                       "Per-side sample size for the manifold metrics")
      ->capture_default_str();
  eval_cmd->add_option("--splits", eval.splits, "Inception Score splits")->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "Subsampling seed")->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "Output directory")->required();
  eval_cmd->add_flag("--allow-curated-reference", eval.allow_curated,
                     "Permit a selected subset as the reference distribution");
  add_threads(eval_cmd, eval.threads);

  CorrelateOptions corr;
  auto* corr_cmd =
      app.add_subcommand("correlate", "Per-class density score versus FID correlation");
  corr_cmd->add_option("--reference", corr.reference, "Labeled real embeddings")->required();
  corr_cmd->add_option("--candidate", corr.candidate, "Labeled generated embeddings")
      ->required();
  corr_cmd->add_option("--out", corr.out, "Output directory")->required();
  add_scorer_flags(corr_cmd, corr.scorer, false);
  corr_cmd->add_option("--n-samples", corr.n_samples, "Per-class sample cap for both sides")
      ->capture_default_str();
  corr_cmd->add_option("--seed", corr.seed, "Subsampling seed")->capture_default_str();
  add_threads(corr_cmd, corr.threads);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (select_cmd->parsed() && !sel.retention && !sel.threshold) {
      throw CLI::RequiredError("--retention or --threshold");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (score_cmd->parsed()) cmd_score(score);
    if (select_cmd->parsed()) cmd_select(sel);
    if (eval_cmd->parsed()) cmd_evaluate(eval);
    if (corr_cmd->parsed()) cmd_correlate(corr);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kOk;
}

}  // namespace curator::cli
