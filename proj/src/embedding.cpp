#include "curator/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "curator/error.hpp"

namespace curator {

static_assert(std::endian::native == std::endian::little,
              "EMB1 I/O assumes a little-endian host");
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

namespace {

std::string non_finite_message(std::size_t r, std::size_t c) {
  std::ostringstream os;
  os << "non-finite entry at (" << r << "," << c << ")";
  return os.str();
}

void check_finite(std::span<const float> data, std::size_t cols) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) ThrowValidation(non_finite_message(i / cols, i % cols));
  }
}

void check_labels(const std::optional<std::vector<std::int32_t>>& labels, std::size_t rows) {
  if (!labels) return;
  if (labels->size() != rows) {
    ThrowValidation("label count " + std::to_string(labels->size()) +
                    " does not match row count " + std::to_string(rows));
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if ((*labels)[i] < 0) {
      ThrowValidation("negative label at row " + std::to_string(i));
    }
  }
}

template <typename T>
void put(std::string& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  buf.append(bytes, sizeof(T));
}

template <typename T>
T get(const char* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  return value;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<float> data,
                                 std::optional<std::vector<std::int32_t>> labels)
    : rows_(rows), cols_(cols), data_(std::move(data)), labels_(std::move(labels)) {
  if (rows_ == 0) ThrowValidation("embedding matrix has no rows (n=0)");
  if (cols_ == 0) ThrowValidation("embedding matrix has zero dimension (d=0)");
  if (data_.size() / cols_ != rows_ || data_.size() % cols_ != 0) {
    ThrowValidation("data size " + std::to_string(data_.size()) + " does not match " +
                    std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  check_finite(data_, cols_);
  check_labels(labels_, rows_);
}

const std::vector<std::int32_t>& EmbeddingMatrix::labels() const {
  if (!labels_) ThrowValidation("labels required");
  return *labels_;
}

EmbeddingMatrix EmbeddingMatrix::take_rows(std::span<const std::size_t> indices) const {
  std::vector<float> out;
  out.reserve(indices.size() * cols_);
  std::optional<std::vector<std::int32_t>> out_labels;
  if (labels_) out_labels.emplace().reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= rows_) {
      ThrowValidation("row index " + std::to_string(idx) + " out of range for " +
                      std::to_string(rows_) + " rows");
    }
    auto r = row(idx);
    out.insert(out.end(), r.begin(), r.end());
    if (labels_) out_labels->push_back((*labels_)[idx]);
  }
  return EmbeddingMatrix(indices.size(), cols_, std::move(out), std::move(out_labels));
}

Manifest::Manifest(std::vector<std::string> entries) : entries_(std::move(entries)) {
  std::unordered_set<std::string> seen;
  seen.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (e.find('\n') != std::string::npos) ThrowValidation("manifest entry contains a newline");
    if (!seen.insert(e).second) ThrowValidation("duplicate manifest entry: " + e);
  }
}

Manifest Manifest::take(std::span<const std::size_t> indices) const {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= entries_.size()) {
      ThrowValidation("manifest index " + std::to_string(idx) + " out of range");
    }
    out.push_back(entries_[idx]);
  }
  return Manifest(std::move(out));
}

void write_embeddings(std::span<const float> data, std::size_t rows, std::size_t cols,
                      const std::optional<std::vector<std::int32_t>>& labels,
                      std::ostream& out) {
  if (rows == 0) ThrowValidation("embedding matrix has no rows (n=0)");
  if (cols == 0 || cols > std::numeric_limits<std::uint32_t>::max()) {
    ThrowValidation("unsupported dimension d=" + std::to_string(cols));
  }
  if (data.size() != rows * cols) ThrowValidation("data size does not match n*d");
  check_finite(data, cols);
  check_labels(labels, rows);

  std::string header;
  header.reserve(kEmb1HeaderSize);
  header.append("EMB1", 4);
  put<std::uint32_t>(header, kEmb1Version);
  put<std::uint64_t>(header, rows);
  put<std::uint32_t>(header, static_cast<std::uint32_t>(cols));
  put<std::uint8_t>(header, 0);
  put<std::uint8_t>(header, labels ? 1 : 0);
  put<std::uint16_t>(header, 0);

  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size_bytes()));
  if (labels) {
    out.write(reinterpret_cast<const char*>(labels->data()),
              static_cast<std::streamsize>(labels->size() * sizeof(std::int32_t)));
  }
  out.flush();
  if (!out) ThrowIo("failed to write embeddings");
}

void write_embeddings(const EmbeddingMatrix& matrix, std::ostream& out) {
  write_embeddings(matrix.data(), matrix.rows(), matrix.cols(), matrix.maybe_labels(), out);
}

EmbeddingMatrix read_embeddings(std::istream& in) {
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) ThrowIo("failed to read embeddings");
  if (bytes.size() < 4 || bytes.compare(0, 4, "EMB1") != 0) ThrowValidation("bad magic");
  if (bytes.size() < kEmb1HeaderSize) ThrowValidation("truncated header");

  const char* p = bytes.data();
  const auto version = get<std::uint32_t>(p + 4);
  const auto rows = get<std::uint64_t>(p + 8);
  const auto cols = get<std::uint32_t>(p + 16);
  const auto dtype = get<std::uint8_t>(p + 20);
  const auto has_labels = get<std::uint8_t>(p + 21);
  const auto reserved = get<std::uint16_t>(p + 22);

  if (version != kEmb1Version) ThrowValidation("unsupported version " + std::to_string(version));
  if (dtype != 0) ThrowValidation("unsupported dtype " + std::to_string(dtype));
  if (has_labels > 1) ThrowValidation("invalid has_labels flag");
  if (reserved != 0) ThrowValidation("reserved header bytes must be zero");
  if (rows == 0) ThrowValidation("embedding file has no rows (n=0)");
  if (cols == 0) ThrowValidation("embedding file has zero dimension (d=0)");

  const std::uint64_t payload_limit = (bytes.size() - kEmb1HeaderSize);
  if (rows > payload_limit / cols) ThrowValidation("truncated payload");
  const std::uint64_t values = rows * cols;
  std::uint64_t expected = values * sizeof(float);
  if (has_labels) expected += rows * sizeof(std::int32_t);
  const std::uint64_t actual = bytes.size() - kEmb1HeaderSize;
  if (actual < expected) ThrowValidation("truncated payload");
  if (actual > expected) ThrowValidation("trailing bytes after payload");

  std::vector<float> data(values);
  std::memcpy(data.data(), p + kEmb1HeaderSize, values * sizeof(float));
  std::optional<std::vector<std::int32_t>> labels;
  if (has_labels) {
    labels.emplace(rows);
    std::memcpy(labels->data(), p + kEmb1HeaderSize + values * sizeof(float),
                rows * sizeof(std::int32_t));
  }
  return EmbeddingMatrix(rows, cols, std::move(data), std::move(labels));
}

void save_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) ThrowIo("cannot open " + path.string() + " for writing");
  write_embeddings(matrix, out);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open " + path.string());
  return read_embeddings(in);
}

void write_manifest(const Manifest& manifest, std::ostream& out) {
  for (const auto& e : manifest.entries()) out << e << '\n';
  out.flush();
  if (!out) ThrowIo("failed to write manifest");
}

Manifest read_manifest(std::istream& in) {
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) entries.push_back(line);
  if (in.bad()) ThrowIo("failed to read manifest");
  return Manifest(std::move(entries));
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) ThrowIo("cannot open " + path.string() + " for writing");
  write_manifest(manifest, out);
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open " + path.string());
  return read_manifest(in);
}

std::filesystem::path manifest_path_for(const std::filesystem::path& embeddings) {
  auto p = embeddings;
  p.replace_extension(".manifest");
  return p;
}

std::map<std::int32_t, std::vector<std::size_t>> partition_indices_by_label(
    const EmbeddingMatrix& matrix) {
  const auto& labels = matrix.labels();
  std::map<std::int32_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  return groups;
}

std::map<std::int32_t, EmbeddingMatrix> partition_by_label(const EmbeddingMatrix& matrix) {
  std::map<std::int32_t, EmbeddingMatrix> out;
  for (const auto& [label, indices] : partition_indices_by_label(matrix)) {
    out.emplace(label, matrix.take_rows(indices));
  }
  return out;
}

}  // namespace curator
