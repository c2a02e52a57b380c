#include "umivr/ingest.hpp"

#include <fstream>

#include "umivr/error.hpp"
#include "umivr/frame_io.hpp"
#include "umivr/json.hpp"
#include "umivr/text.hpp"

namespace umivr {

IngestItem ingest_item_from_json(const nlohmann::json& j) {
  IngestItem item;
  try {
    item.record = j.get<VideoRecord>();
    if (auto it = j.find("frames"); it != j.end() && !it->is_null()) {
      item.frames = it->get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad record: ") + e.what());
  }
  if (item.record.id.empty()) throw Error(ErrorCode::InvalidArgument, "record without id");
  return item;
}

std::vector<IngestItem> read_ingest_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<IngestItem> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidArgument,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(ingest_item_from_json(j));
  }
  return out;
}

VideoRecord describe_item(const IngestItem& item, Gateway& gateway, const TqfsOptions& tqfs) {
  if (!item.frames) {
    throw Error(ErrorCode::InvalidArgument, "record " + item.record.id + " has no frames to describe");
  }
  Video video;
  video.frames = read_pgm_dir(*item.frames);
  video.fps = estimate_fps(video.frames);
  const auto selection = select_frames(video, tqfs, thumbnail_embedding);

  std::vector<Frame> keyframes;
  for (auto i : selection.indices) keyframes.push_back(video.frames[i]);
  const auto d = gateway.describe_video(keyframes);

  VideoRecord r = item.record;
  r.caption = d.caption;
  r.objects = d.objects;
  r.scene_keywords = d.scene_keywords;
  r.frame_timestamps = selection.timestamps;
  return r;
}

VectorIndex extend_index(const VectorIndex& base, std::span<const VideoRecord> records,
                         const TextEmbedder& embedder) {
  if (embedder.dim() != base.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "embedder dimension " + std::to_string(embedder.dim()) +
                                                  " differs from index dimension " +
                                                  std::to_string(base.dim()));
  }
  VectorIndex next = base;
  for (const auto& r : records) {
    if (r.id.empty()) throw Error(ErrorCode::InvalidArgument, "record without id");
    if (text::trim(r.caption).empty()) {
      throw Error(ErrorCode::InvalidArgument, "record " + r.id + " has no caption");
    }
    next.add(r, embedder.embed(r.caption));
  }
  return next;
}

}  // namespace umivr
