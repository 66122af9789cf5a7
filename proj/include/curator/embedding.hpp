#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace curator {

// Dense n x d feature matrix stored row-major in 32-bit floats, with optional
// non-negative class labels. Construction validates every invariant, so any
// EmbeddingMatrix value in the program is well formed.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<float> data,
                  std::optional<std::vector<std::int32_t>> labels = std::nullopt);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool has_labels() const noexcept { return labels_.has_value(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  float at(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }
  // Throws if the matrix carries no labels.
  const std::vector<std::int32_t>& labels() const;
  const std::optional<std::vector<std::int32_t>>& maybe_labels() const noexcept {
    return labels_;
  }

  // Rows at `indices`, in the given order, labels carried through.
  EmbeddingMatrix take_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<float> data_;
  std::optional<std::vector<std::int32_t>> labels_;
};

// One identifier per matrix row, unique.
class Manifest {
 public:
  Manifest() = default;
  explicit Manifest(std::vector<std::string> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<std::string>& entries() const noexcept { return entries_; }
  const std::string& operator[](std::size_t i) const { return entries_[i]; }

  Manifest take(std::span<const std::size_t> indices) const;

  friend bool operator==(const Manifest&, const Manifest&) = default;

 private:
  std::vector<std::string> entries_;
};

// EMB1 container. Layout (little endian):
//   magic "EMB1" | version u32 = 1 | n u64 | d u32 | dtype u8 (0 = f32)
//   | has_labels u8 | reserved u16 = 0 | n*d f32 row-major | [n i32 labels]
inline constexpr std::size_t kEmb1HeaderSize = 24;
inline constexpr std::uint32_t kEmb1Version = 1;

void write_embeddings(const EmbeddingMatrix& matrix, std::ostream& out);
// Raw-buffer form; rejects non-finite entries before emitting anything.
void write_embeddings(std::span<const float> data, std::size_t rows, std::size_t cols,
                      const std::optional<std::vector<std::int32_t>>& labels,
                      std::ostream& out);
EmbeddingMatrix read_embeddings(std::istream& in);

void save_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

void write_manifest(const Manifest& manifest, std::ostream& out);
Manifest read_manifest(std::istream& in);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest load_manifest(const std::filesystem::path& path);

// `<dir>/<stem>.manifest` for an embeddings file `<dir>/<stem>.<ext>`.
std::filesystem::path manifest_path_for(const std::filesystem::path& embeddings);

// Row indices of each class, ascending within a class.
std::map<std::int32_t, std::vector<std::size_t>> partition_indices_by_label(
    const EmbeddingMatrix& matrix);
std::map<std::int32_t, EmbeddingMatrix> partition_by_label(const EmbeddingMatrix& matrix);

}  // namespace curator
