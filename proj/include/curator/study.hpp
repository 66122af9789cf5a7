#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "curator/density.hpp"
#include "curator/embedding.hpp"

namespace curator {

struct ClassStudyRow {
  std::int32_t class_id = 0;
  double mean_score = 0.0;
  double fid = 0.0;
  std::size_t n_real = 0;
  std::size_t n_gen = 0;

  friend bool operator==(const ClassStudyRow&, const ClassStudyRow&) = default;
};

struct CorrelationReport {
  double pearson = 0.0;
  double spearman = 0.0;
  std::size_t n_classes = 0;
  std::string scorer;
};

struct StudyConfig {
  ScorerConfig scorer;
  std::size_t real_cap = 700;
  std::size_t generated_cap = 700;
  std::uint64_t seed = 0;
};

struct StudyResult {
  std::vector<ClassStudyRow> rows;  // ascending class id
  CorrelationReport correlation;
};

// Pearson product-moment correlation. Throws "zero variance" when either
// input is constant; needs at least 3 points.
double pearson_correlation(std::span<const double> x, std::span<const double> y);
// Pearson on ranks, ties receiving their average rank.
double spearman_correlation(std::span<const double> x, std::span<const double> y);
std::vector<double> average_ranks(std::span<const double> values);

// Per class of `generated`: cap both sides with seeded subsampling, fit the
// scorer on the class's real rows, record their mean score and the FID
// between the class's real and generated summaries. Then correlate mean
// score against FID across classes.
StudyResult run_study(const EmbeddingMatrix& real, const EmbeddingMatrix& generated,
                      const StudyConfig& config, int threads = 1);

CorrelationReport correlate_rows(std::span<const ClassStudyRow> rows, const std::string& scorer);

void write_study_csv(std::vector<ClassStudyRow> rows, std::ostream& out);
std::vector<ClassStudyRow> read_study_csv(std::istream& in);
void write_study_json(const CorrelationReport& report, std::ostream& out);
// Scatter of mean score (x) against FID (y), one <circle> per row.
void write_study_svg(std::vector<ClassStudyRow> rows, const CorrelationReport& report,
                     std::ostream& out);

// Writes study.csv, study.json and study.svg into `directory`.
void export_study(const std::vector<ClassStudyRow>& rows, const CorrelationReport& report,
                  const std::filesystem::path& directory);

}  // namespace curator
