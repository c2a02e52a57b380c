#pragma once

// JSON mappings for the index domain types. Other modules declare theirs next
// to the types they own.

#include <json.hpp>

#include "umivr/index.hpp"

namespace umivr {

void to_json(nlohmann::json& j, const VideoRecord& r);
void from_json(const nlohmann::json& j, VideoRecord& r);
void to_json(nlohmann::json& j, const SimilarityEntry& e);
void from_json(const nlohmann::json& j, SimilarityEntry& e);

}  // namespace umivr
