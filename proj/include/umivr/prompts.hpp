#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>

namespace umivr {

enum class TemplateId {
  Caption,
  MainObjects,
  SceneType,
  QuestionLevel0,
  QuestionLevel1,
  QuestionLevel2,
  SimulatedAnswer,
  Refine,
};

inline constexpr std::array<TemplateId, 8> kAllTemplates = {
    TemplateId::Caption,        TemplateId::MainObjects,     TemplateId::SceneType,
    TemplateId::QuestionLevel0, TemplateId::QuestionLevel1,  TemplateId::QuestionLevel2,
    TemplateId::SimulatedAnswer, TemplateId::Refine};

// "caption", "main_objects", "scene_type", "q_level0", "q_level1", "q_level2",
// "sim_answer", "refine".
std::string_view to_string(TemplateId id) noexcept;
TemplateId template_from_string(std::string_view name);

struct PromptTemplate {
  TemplateId id;
  std::string_view system_text;
  std::string_view user_text;  // with {placeholder}s
  double temperature;
  int max_new_tokens;
};

const PromptTemplate& prompt_template(TemplateId id);

using Bindings = std::map<std::string, std::string, std::less<>>;

// Substitutes {text_query}, {video_meta_info_list}, {pre_query},
// {cur_answer}, {question} and {video_features}. Any of those left without a
// binding throws UnboundPlaceholder; other text is copied byte for byte.
std::string render(std::string_view template_text, const Bindings& bindings);

struct RenderedPrompt {
  std::string system;
  std::string user;
};

RenderedPrompt render(TemplateId id, const Bindings& bindings);

}  // namespace umivr
