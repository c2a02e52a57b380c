#include "umivr/json.hpp"

namespace umivr {

void to_json(nlohmann::json& j, const VideoRecord& r) {
  j = nlohmann::json{{"id", r.id},
                     {"caption", r.caption},
                     {"objects", r.objects},
                     {"scene_keywords", r.scene_keywords},
                     {"frame_timestamps", r.frame_timestamps}};
}

void from_json(const nlohmann::json& j, VideoRecord& r) {
  j.at("id").get_to(r.id);
  r.caption = j.value("caption", std::string{});
  r.objects = j.value("objects", std::vector<std::string>{});
  r.scene_keywords = j.value("scene_keywords", std::vector<std::string>{});
  r.frame_timestamps = j.value("frame_timestamps", std::vector<double>{});
}

void to_json(nlohmann::json& j, const SimilarityEntry& e) {
  j = nlohmann::json{{"id", e.id}, {"score", e.score}};
}

void from_json(const nlohmann::json& j, SimilarityEntry& e) {
  j.at("id").get_to(e.id);
  j.at("score").get_to(e.score);
}

}  // namespace umivr
