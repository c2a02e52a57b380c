#include "umivr/prompts.hpp"

#include <algorithm>

#include "umivr/error.hpp"

namespace umivr {

namespace {

constexpr std::string_view kMetaSystem =
    "A conversation between a curious human and an AI assistant. The assistant is specialized "
    "in analyzing video content and provides detailed, precise, and evidence-based "
    "descriptions. Follow these guidelines strictly:\n"
    "- **Precision**: Describe only what is directly observable from the video.\n"
    "- **Detail**: Include all readily visible details while keeping responses focused.\n"
    "- **No Speculation**: If any part of the content is uncertain, explicitly state the "
    "uncertainty instead of guessing.";

constexpr std::string_view kCaptionUser =
    "{video_features}\n"
    "Please provide a detailed and highly accurate caption that fully describes the overall "
    "scene or main activity in this video. Make sure your caption includes all relevant visual "
    "details and does not exceed 80 words. Do not add any information that is not clearly "
    "supported by the video content.";

constexpr std::string_view kMainObjectsUser =
    "{video_features}Based solely on the visible content of the video, list up to five primary "
    "objects or characters you can clearly identify. Each item should be provided as a single "
    "word or a brief noun phrase (e.g., 'man', 'tree', 'couch'). Only include items that are "
    "explicitly visible and avoid any speculation.";

constexpr std::string_view kSceneTypeUser =
    "{video_features}\n"
    "Based on the visual content of the video, identify the primary setting, scene type, or "
    "dominant visual theme by listing up to five concise keywords (e.g., 'underwater', "
    "'indoor', 'black'). Only include keywords that are directly evident from the video, and do "
    "not include any speculative information.";

constexpr std::string_view kLevel0System =
    "You are an advanced AI specialized in asking clarifying questions for vague queries. Your "
    "task is to extract details—such as appearance, activities, or events—to enable "
    "precise retrieval.";

constexpr std::string_view kLevel0User =
    "Query: {text_query}\n"
    "Ask one open-ended clarifying question focusing on the subject's appearance, activities, "
    "or events.Return ONLY the question.";

constexpr std::string_view kLevel1System =
    "You are a clarifying question generator for text-video retrieval. Given a user query and "
    "multiple video info, your task is to generate one question that focuses on visual "
    "differences.";

constexpr std::string_view kLevel1User =
    "Query: {text_query}\n"
    "Videos: {video_meta_info_list}\n"
    "\n"
    "Ask one question starting with What, Where, or Who to distinguish these videos based on "
    "visual details.\n"
    "Return ONLY the question.";

constexpr std::string_view kLevel2System =
    "You are an advanced AI specialized in asking clarifying questions for queries. Your task "
    "is to extract details—such as appearance, activities, or events—to enable "
    "precise retrieval.";

constexpr std::string_view kLevel2User =
    "You need to ask a question based on a user query.\n"
    "1. First you need to evaluate whether the user's query includes sufficient visual details "
    "(such as characters, colors, objects, or locations).\n"
    "User Query: {text_query}\n"
    "\n"
    "2. Ask a question\n"
    "    - If details are missing, generate one question to gather them.\n"
    "    - If the query is already detailed, generate a clarifying question to further enrich "
    "the description (e.g., 'What other objects are present?', 'What is the main color?', or "
    "'Where is the event taking place?').\n"
    "\n"
    "\n"
    "Return ONLY the question, nothing else.";

constexpr std::string_view kAnswerSystem =
    "You are a video question answering assistant. When provided with a video and a question, "
    "your task is to provide a concise, one-sentence answer. Your answer should clearly state "
    "the key visual details such as people, objects, scenes, and events. Keep it clear, direct, "
    "and focused on essential information.";

constexpr std::string_view kAnswerUser =
    "{video_features}\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Provide a one-sentence answer that clearly identifies the key visual details in the video, "
    "such as people, objects, scenes, and events.";

constexpr std::string_view kRefineSystem =
    "You are an expert in query refinement for interactive text-video retrieval. Your task is "
    "to synthesize and update a previous query with new details from the current answer. "
    "Ensure the new query includes key information (e.g., characters, events, objects, colors, "
    "locations) and does not exceed 60 words.)";

constexpr std::string_view kRefineUser =
    "Previous Query: {pre_query}\n"
    "\n"
    "Current Answer (includes new information to enhance video retrieval):\n"
    "{cur_answer}\n"
    "\n"
    "Combine the above into one concise, positive declarative sentence that includes key "
    "details (characters, events, objects, colors, locations, etc.). Ensure the new query "
    "leverages the new information from the current answer for better retrieval and is no "
    "longer than 60 words.\n"
    "\n"
    "Only return the refined query, nothing else.";

constexpr int kMaxNewTokens = 1024;

constexpr std::array<PromptTemplate, 8> kTemplates = {{
    {TemplateId::Caption, kMetaSystem, kCaptionUser, 0.1, kMaxNewTokens},
    {TemplateId::MainObjects, kMetaSystem, kMainObjectsUser, 0.1, kMaxNewTokens},
    {TemplateId::SceneType, kMetaSystem, kSceneTypeUser, 0.1, kMaxNewTokens},
    {TemplateId::QuestionLevel0, kLevel0System, kLevel0User, 0.1, kMaxNewTokens},
    {TemplateId::QuestionLevel1, kLevel1System, kLevel1User, 0.1, kMaxNewTokens},
    {TemplateId::QuestionLevel2, kLevel2System, kLevel2User, 0.1, kMaxNewTokens},
    {TemplateId::SimulatedAnswer, kAnswerSystem, kAnswerUser, 0.7, kMaxNewTokens},
    {TemplateId::Refine, kRefineSystem, kRefineUser, 0.1, kMaxNewTokens},
}};

constexpr std::array<std::string_view, 6> kPlaceholders = {
    "text_query", "video_meta_info_list", "pre_query", "cur_answer", "question", "video_features"};

}  // namespace

std::string_view to_string(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::Caption: return "caption";
    case TemplateId::MainObjects: return "main_objects";
    case TemplateId::SceneType: return "scene_type";
    case TemplateId::QuestionLevel0: return "q_level0";
    case TemplateId::QuestionLevel1: return "q_level1";
    case TemplateId::QuestionLevel2: return "q_level2";
    case TemplateId::SimulatedAnswer: return "sim_answer";
    case TemplateId::Refine: return "refine";
  }
  return "unknown";
}

TemplateId template_from_string(std::string_view name) {
  for (auto id : kAllTemplates) {
    if (to_string(id) == name) return id;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown template " + std::string(name));
}

const PromptTemplate& prompt_template(TemplateId id) {
  return kTemplates[static_cast<std::size_t>(id)];
}

std::string render(std::string_view text, const Bindings& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const auto close = text.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto name = text.substr(i + 1, close - i - 1);
        if (std::find(kPlaceholders.begin(), kPlaceholders.end(), name) != kPlaceholders.end()) {
          const auto it = bindings.find(name);
          if (it == bindings.end()) {
            throw Error(ErrorCode::UnboundPlaceholder,
                        "placeholder {" + std::string(name) + "} has no binding");
          }
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

RenderedPrompt render(TemplateId id, const Bindings& bindings) {
  const auto& t = prompt_template(id);
  return {render(t.system_text, bindings), render(t.user_text, bindings)};
}

}  // namespace umivr
