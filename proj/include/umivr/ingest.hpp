#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "umivr/gateway.hpp"
#include "umivr/index.hpp"
#include "umivr/text_embedder.hpp"
#include "umivr/tqfs.hpp"

namespace umivr {

// One input line: a VideoRecord, optionally with "frames": a directory of
// `<millis>.pgm` files to describe.
struct IngestItem {
  VideoRecord record;
  std::optional<std::filesystem::path> frames;
};

IngestItem ingest_item_from_json(const nlohmann::json& j);
std::vector<IngestItem> read_ingest_jsonl(const std::filesystem::path& path);

// Selects key frames with TQFS and fills caption, objects, scene keywords and
// frame timestamps from the gateway.
VideoRecord describe_item(const IngestItem& item, Gateway& gateway, const TqfsOptions& tqfs);

// Returns a copy of `base` with `records` appended; each row embeds the
// caption. Throws DuplicateId, or InvalidArgument for a record without id or
// caption. `base` is left untouched on error.
VectorIndex extend_index(const VectorIndex& base, std::span<const VideoRecord> records,
                         const TextEmbedder& embedder);

}  // namespace umivr
