#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "umivr/embedding.hpp"

namespace umivr {

// Meta-information for one corpus video (produced offline).
struct VideoRecord {
  std::string id;
  std::string caption;
  std::vector<std::string> objects;         // <= 5
  std::vector<std::string> scene_keywords;  // <= 5
  std::vector<double> frame_timestamps;     // seconds

  friend bool operator==(const VideoRecord&, const VideoRecord&) = default;
};

struct SimilarityEntry {
  std::string id;
  double score = 0.0;

  friend bool operator==(const SimilarityEntry&, const SimilarityEntry&) = default;
};

// Sorted by score descending, ties by ascending id.
using SimilarityList = std::vector<SimilarityEntry>;

inline constexpr std::uint32_t kIndexFormatVersion = 1;

// Exact cosine index over caption embeddings. Rows are stored as f32.
// Immutable once built; const member functions are safe to call from many
// threads.
class VectorIndex {
 public:
  explicit VectorIndex(std::size_t dim = kDefaultDim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  // Throws DuplicateId or DimensionMismatch.
  void add(VideoRecord record, const Embedding& caption_embedding);
  // Stores the row as given (no renormalization); used by load().
  void add_row(VideoRecord record, std::span<const float> row);

  const VideoRecord& record(std::size_t row) const { return records_.at(row); }
  const std::vector<VideoRecord>& records() const noexcept { return records_; }
  std::optional<std::size_t> find(const std::string& id) const;
  std::span<const float> row(std::size_t row) const;
  Embedding embedding(std::size_t row) const;

  // Cosine of the query against every row, in row order.
  std::vector<double> scores(const Embedding& query) const;
  // Throws EmptyIndex; k larger than size() returns everything.
  SimilarityList top_k(const Embedding& query, std::size_t k) const;
  // 1-based rank of `id` under the same total order as top_k.
  std::size_t rank_of(const Embedding& query, const std::string& id) const;

  // Writes `path` (binary matrix) and the JSON-lines sidecar next to it.
  void persist(const std::filesystem::path& path) const;
  static VectorIndex load(const std::filesystem::path& path);
  static std::filesystem::path meta_path(const std::filesystem::path& path);

 private:
  void check_query(const Embedding& query) const;

  std::size_t dim_;
  std::vector<VideoRecord> records_;
  std::vector<std::string> ids_;
  std::vector<float> matrix_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace umivr
