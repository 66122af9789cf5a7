#include "curator/study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "curator/error.hpp"
#include "curator/metrics.hpp"
#include "curator/report.hpp"
#include "curator/sampling.hpp"

namespace curator {

namespace {

void sort_by_class(std::vector<ClassStudyRow>& rows) {
  std::sort(rows.begin(), rows.end(),
            [](const ClassStudyRow& a, const ClassStudyRow& b) { return a.class_id < b.class_id; });
}

EmbeddingMatrix capped(const EmbeddingMatrix& m, std::size_t cap, std::uint64_t seed) {
  if (cap == 0 || m.rows() <= cap) return m;
  return subsample(m, cap, seed);
}

std::string with_class(std::int32_t label, const char* what) {
  return "class " + std::to_string(label) + ": " + what;
}

}  // namespace

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) ThrowValidation("correlation inputs differ in length");
  if (x.size() < 3) ThrowValidation("correlation needs at least 3 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) ThrowNumeric("zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t start = 0; start < order.size();) {
    std::size_t stop = start + 1;
    while (stop < order.size() && values[order[stop]] == values[order[start]]) ++stop;
    // 1-based ranks start+1 .. stop, averaged.
    const double rank = 0.5 * static_cast<double>(start + 1 + stop);
    for (std::size_t i = start; i < stop; ++i) ranks[order[i]] = rank;
    start = stop;
  }
  return ranks;
}

double spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) ThrowValidation("correlation inputs differ in length");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson_correlation(rx, ry);
}

CorrelationReport correlate_rows(std::span<const ClassStudyRow> rows, const std::string& scorer) {
  std::vector<double> scores, fids;
  for (const auto& r : rows) {
    scores.push_back(r.mean_score);
    fids.push_back(r.fid);
  }
  CorrelationReport report;
  report.pearson = pearson_correlation(scores, fids);
  report.spearman = spearman_correlation(scores, fids);
  report.n_classes = rows.size();
  report.scorer = scorer;
  return report;
}

StudyResult run_study(const EmbeddingMatrix& real, const EmbeddingMatrix& generated,
                      const StudyConfig& config, int threads) {
  if (!real.has_labels() || !generated.has_labels()) ThrowValidation("labels required");
  if (real.cols() != generated.cols()) {
    ThrowValidation("dimension mismatch: real d=" + std::to_string(real.cols()) +
                    ", generated d=" + std::to_string(generated.cols()));
  }
  const auto real_classes = partition_indices_by_label(real);
  const auto gen_classes = partition_indices_by_label(generated);

  StudyResult result;
  for (const auto& [label, gen_indices] : gen_classes) {
    const auto found = real_classes.find(label);
    if (found == real_classes.end()) {
      ThrowValidation(with_class(label, "present in generated data but not in real data"));
    }
    const auto stream = 2 * static_cast<std::uint64_t>(label);
    const auto real_rows =
        capped(real.take_rows(found->second), config.real_cap, derive_seed(config.seed, stream));
    const auto gen_rows = capped(generated.take_rows(gen_indices), config.generated_cap,
                                 derive_seed(config.seed, stream + 1));
    if (real_rows.rows() < 2 || gen_rows.rows() < 2) {
      ThrowValidation(with_class(label, "fewer than 2 usable points"));
    }

    ClassStudyRow row;
    row.class_id = label;
    row.n_real = real_rows.rows();
    row.n_gen = gen_rows.rows();
    try {
      const auto scores = fit_and_score(real_rows, config.scorer, threads);
      double sum = 0.0;
      for (double s : scores.values()) sum += s;
      row.mean_score = sum / static_cast<double>(scores.size());
      row.fid =
          frechet_distance(gaussian_summary(real_rows), gaussian_summary(gen_rows)).value;
    } catch (const Error& e) {
      throw Error(e.kind(), with_class(label, e.what()));
    }
    result.rows.push_back(row);
  }
  result.correlation = correlate_rows(result.rows, to_string(config.scorer.kind));
  return result;
}

void write_study_csv(std::vector<ClassStudyRow> rows, std::ostream& out) {
  sort_by_class(rows);
  out << "class_id,mean_score,fid,n_real,n_gen\n";
  for (const auto& r : rows) {
    out << r.class_id << ',' << format_double(r.mean_score) << ',' << format_double(r.fid) << ','
        << r.n_real << ',' << r.n_gen << '\n';
  }
  if (!out) ThrowIo("failed to write study CSV");
}

std::vector<ClassStudyRow> read_study_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "class_id,mean_score,fid,n_real,n_gen") {
    ThrowValidation("unexpected study CSV header");
  }
  std::vector<ClassStudyRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell[5];
    for (auto& c : cell) {
      if (!std::getline(fields, c, ',')) ThrowValidation("malformed study CSV line: " + line);
    }
    try {
      ClassStudyRow r;
      r.class_id = static_cast<std::int32_t>(std::stol(cell[0]));
      r.mean_score = std::stod(cell[1]);
      r.fid = std::stod(cell[2]);
      r.n_real = std::stoull(cell[3]);
      r.n_gen = std::stoull(cell[4]);
      rows.push_back(r);
    } catch (const std::exception&) {
      ThrowValidation("malformed study CSV line: " + line);
    }
  }
  return rows;
}

void write_study_json(const CorrelationReport& report, std::ostream& out) {
  Json j;
  j["scorer"] = report.scorer;
  j["n_classes"] = report.n_classes;
  j["pearson"] = report.pearson;
  j["spearman"] = report.spearman;
  write_json(j, out);
}

void write_study_svg(std::vector<ClassStudyRow> rows, const CorrelationReport& report,
                     std::ostream& out) {
  sort_by_class(rows);
  constexpr double kWidth = 640, kHeight = 480, kMargin = 60;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  if (!rows.empty()) {
    x_lo = x_hi = rows.front().mean_score;
    y_lo = y_hi = rows.front().fid;
    for (const auto& r : rows) {
      x_lo = std::min(x_lo, r.mean_score);
      x_hi = std::max(x_hi, r.mean_score);
      y_lo = std::min(y_lo, r.fid);
      y_hi = std::max(y_hi, r.fid);
    }
  }
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi == y_lo) y_hi = y_lo + 1;
  auto px = [&](double x) { return kMargin + (x - x_lo) / (x_hi - x_lo) * (kWidth - 2 * kMargin); };
  auto py = [&](double y) {
    return kHeight - kMargin - (y - y_lo) / (y_hi - y_lo) * (kHeight - 2 * kMargin);
  };
  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  out << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  out << "<line x1=\"60\" y1=\"420\" x2=\"580\" y2=\"420\" stroke=\"black\"/>\n";
  out << "<line x1=\"60\" y1=\"60\" x2=\"60\" y2=\"420\" stroke=\"black\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"320\" y=\"460\" text-anchor=\"middle\">mean %s score</text>\n",
                report.scorer.c_str());
  out << buf;
  out << "<text x=\"20\" y=\"240\" transform=\"rotate(-90 20 240)\" "
         "text-anchor=\"middle\">FID</text>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"320\" y=\"30\" text-anchor=\"middle\">pearson %.4f, spearman %.4f, "
                "%zu classes</text>\n",
                report.pearson, report.spearman, report.n_classes);
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"3\" fill=\"steelblue\">"
                  "<title>class %d</title></circle>\n",
                  px(r.mean_score), py(r.fid), r.class_id);
    out << buf;
  }
  out << "</svg>\n";
  if (!out) ThrowIo("failed to write study SVG");
}

void export_study(const std::vector<ClassStudyRow>& rows, const CorrelationReport& report,
                  const std::filesystem::path& directory) {
  if (rows.empty()) ThrowValidation("no study rows to export");
  auto open = [&](const char* name) {
    std::ofstream f(directory / name, std::ios::binary | std::ios::trunc);
    if (!f) ThrowIo("cannot open " + (directory / name).string() + " for writing");
    return f;
  };
  {
    auto f = open("study.csv");
    write_study_csv(rows, f);
  }
  {
    auto f = open("study.json");
    write_study_json(report, f);
  }
  {
    auto f = open("study.svg");
    write_study_svg(rows, report, f);
  }
}

}  // namespace curator
