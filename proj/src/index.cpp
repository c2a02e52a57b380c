#include "umivr/index.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "umivr/error.hpp"
#include "umivr/json.hpp"
#include "umivr/kernels.hpp"

namespace umivr {

namespace {

constexpr std::array<char, 4> kMagic = {'U', 'M', 'V', 'R'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 8;

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xFFu));
    u = static_cast<U>(u >> 8);
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
  return static_cast<T>(u);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "read failed: " + path.string());
  return std::move(buf).str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "rename failed: " + path.string() + ": " + ec.message());
}

}  // namespace

VectorIndex::VectorIndex(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "index dimension must be positive");
}

void VectorIndex::add(VideoRecord record, const Embedding& caption_embedding) {
  if (caption_embedding.dim() != dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "record " + record.id + " has a " + std::to_string(caption_embedding.dim()) +
                    "-d embedding, index is " + std::to_string(dim_) + "-d");
  }
  std::vector<float> row(dim_);
  const auto v = caption_embedding.values();
  std::transform(v.begin(), v.end(), row.begin(), [](double d) { return static_cast<float>(d); });
  add_row(std::move(record), row);
}

void VectorIndex::add_row(VideoRecord record, std::span<const float> row) {
  if (row.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "row dimension " + std::to_string(row.size()) +
                                                  " != index dimension " + std::to_string(dim_));
  }
  if (by_id_.contains(record.id)) throw Error(ErrorCode::DuplicateId, "duplicate id " + record.id);
  by_id_.emplace(record.id, records_.size());
  ids_.push_back(record.id);
  matrix_.insert(matrix_.end(), row.begin(), row.end());
  records_.push_back(std::move(record));
}

std::optional<std::size_t> VectorIndex::find(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> VectorIndex::row(std::size_t row) const {
  if (row >= size()) throw Error(ErrorCode::UnknownId, "row out of range");
  return std::span<const float>(matrix_).subspan(row * dim_, dim_);
}

Embedding VectorIndex::embedding(std::size_t r) const {
  const auto src = row(r);
  return Embedding::from_unit(std::vector<double>(src.begin(), src.end()));
}

void VectorIndex::check_query(const Embedding& query) const {
  if (empty()) throw Error(ErrorCode::EmptyIndex, "index is empty");
  if (query.dim() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "query dimension " + std::to_string(query.dim()) +
                                                  " != index dimension " + std::to_string(dim_));
  }
}

std::vector<double> VectorIndex::scores(const Embedding& query) const {
  check_query(query);
  auto out = kernels::omp::cosine_scan({matrix_, size(), dim_}, query.values());
  for (double& s : out) s = std::clamp(s, -1.0, 1.0);
  return out;
}

SimilarityList VectorIndex::top_k(const Embedding& query, std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  const auto s = scores(query);
  const auto best = kernels::omp::top_k(s, ids_, k);
  SimilarityList out;
  out.reserve(best.size());
  for (const auto& b : best) out.push_back({ids_[b.row], b.score});
  return out;
}

std::size_t VectorIndex::rank_of(const Embedding& query, const std::string& id) const {
  const auto row = find(id);
  if (!row) throw Error(ErrorCode::UnknownId, "unknown id " + id);
  const auto s = scores(query);
  return kernels::omp::count_ahead(s, ids_, *row) + 1;
}

std::filesystem::path VectorIndex::meta_path(const std::filesystem::path& path) {
  auto meta = path;
  meta.replace_extension(".meta.jsonl");
  return meta;
}

void VectorIndex::persist(const std::filesystem::path& path) const {
  std::string bin;
  bin.reserve(kHeaderBytes + matrix_.size() * 4);
  bin.append(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(bin, kIndexFormatVersion);
  put_le<std::uint32_t>(bin, static_cast<std::uint32_t>(dim_));
  put_le<std::uint64_t>(bin, static_cast<std::uint64_t>(size()));
  for (float f : matrix_) put_le<std::uint32_t>(bin, std::bit_cast<std::uint32_t>(f));

  std::string meta;
  for (const auto& r : records_) {
    meta += nlohmann::json(r).dump();
    meta += '\n';
  }
  // Sidecar first: a reader that sees the new matrix also sees its metadata.
  write_file_atomic(meta_path(path), meta);
  write_file_atomic(path, bin);
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
  const std::string bin = read_file(path);
  if (bin.size() < kHeaderBytes || !std::equal(kMagic.begin(), kMagic.end(), bin.begin())) {
    throw Error(ErrorCode::FormatVersionMismatch, path.string() + " is not an index file");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bin.data());
  const auto version = get_le<std::uint32_t>(p + 4);
  if (version != kIndexFormatVersion) {
    throw Error(ErrorCode::FormatVersionMismatch,
                "index format version " + std::to_string(version) + " is not supported");
  }
  const auto dim = get_le<std::uint32_t>(p + 8);
  const auto count = get_le<std::uint64_t>(p + 12);
  if (dim == 0 || count > (bin.size() - kHeaderBytes) / (4ull * dim) ||
      bin.size() != kHeaderBytes + count * dim * 4ull) {
    throw Error(ErrorCode::FormatVersionMismatch,
                path.string() + " is truncated or has trailing bytes");
  }

  const std::string meta = read_file(meta_path(path));
  std::vector<VideoRecord> records;
  std::istringstream lines(meta);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line).get<VideoRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::FormatVersionMismatch,
                  "bad metadata line in " + meta_path(path).string() + ": " + e.what());
    }
  }
  if (records.size() != count) {
    throw Error(ErrorCode::FormatVersionMismatch,
                "metadata has " + std::to_string(records.size()) + " records, matrix has " +
                    std::to_string(count));
  }

  VectorIndex index(dim);
  index.matrix_.reserve(count * dim);
  std::vector<float> row(dim);
  const unsigned char* cursor = p + kHeaderBytes;
  for (std::uint64_t r = 0; r < count; ++r) {
    for (std::uint32_t d = 0; d < dim; ++d, cursor += 4) {
      row[d] = std::bit_cast<float>(get_le<std::uint32_t>(cursor));
    }
    index.add_row(std::move(records[r]), row);
  }
  return index;
}

}  // namespace umivr
