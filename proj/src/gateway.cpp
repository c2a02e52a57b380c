#include "umivr/gateway.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <fstream>
#include <future>
#include <thread>

#include "umivr/error.hpp"
#include "umivr/text.hpp"

namespace umivr {

namespace {

constexpr std::size_t kCaptionWordCap = 80;
constexpr std::size_t kQueryWordCap = 60;

std::string builtin_reply(const GenerationRequest& r) {
  const auto binding = [&](const char* name) {
    auto it = r.bindings.find(name);
    return it == r.bindings.end() ? std::string{} : it->second;
  };
  switch (r.template_id) {
    case TemplateId::Caption: return "A video.";
    case TemplateId::MainObjects: return "object";
    case TemplateId::SceneType: return "scene";
    case TemplateId::QuestionLevel0:
      return "Can you describe the subject's appearance, activities, or events in more detail?";
    case TemplateId::QuestionLevel1: return "What visual detail sets the target video apart?";
    case TemplateId::QuestionLevel2: return "What other objects are present?";
    case TemplateId::SimulatedAnswer: {
      // First line of the meta text is "Caption: ...".
      auto features = binding("video_features");
      features = features.substr(0, features.find('\n'));
      constexpr std::string_view kPrefix = "Caption: ";
      if (features.starts_with(kPrefix)) features.erase(0, kPrefix.size());
      return features.empty() ? "I am not sure." : features;
    }
    case TemplateId::Refine: return binding("pre_query") + " " + binding("cur_answer");
  }
  return {};
}

bool starts_with_wh(std::string_view q) {
  std::size_t i = 0;
  while (i < q.size() && !std::isalpha(static_cast<unsigned char>(q[i]))) ++i;
  std::string word;
  while (i < q.size() && std::isalpha(static_cast<unsigned char>(q[i]))) {
    word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(q[i++]))));
  }
  return word == "what" || word == "where" || word == "who";
}

std::string frames_key(std::span<const Frame> frames) {
  std::uint64_t h = text::fnv1a64("");
  for (const auto& f : frames) {
    std::string head = std::to_string(std::llround(f.timestamp * 1000.0)) + ":" +
                       std::to_string(f.width) + "x" + std::to_string(f.height) + ";";
    for (char c : head) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ull;
    for (auto p : f.pixels) h = (h ^ p) * 0x100000001b3ull;
  }
  return text::hex64(h);
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

// --- MockBackend -----------------------------------------------------------

MockBackend::MockBackend(nlohmann::json table, Options options) : options_(options) {
  if (!table.is_object()) throw Error(ErrorCode::InvalidArgument, "mock table must be a JSON object");
  for (auto& [key, value] : table.items()) {
    Entry e;
    if (value.is_string()) {
      e.text = value.get<std::string>();
    } else if (value.is_object()) {
      e.text = value.value("text", std::string{});
      e.delay = std::chrono::milliseconds(value.value("delay_ms", 0));
    } else {
      throw Error(ErrorCode::InvalidArgument, "mock entry " + key + " must be a string or object");
    }
    table_.emplace(key, std::move(e));
  }
}

std::shared_ptr<MockBackend> MockBackend::from_file(const std::filesystem::path& path,
                                                    Options options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open mock table " + path.string());
  try {
    return std::make_shared<MockBackend>(nlohmann::json::parse(in), options);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument,
                "mock table " + path.string() + " is not valid JSON: " + e.what());
  }
}

BackendCapabilities MockBackend::capabilities() const {
  return {!options_.accepts_frame_attachments, options_.accepts_frame_attachments};
}

const MockBackend::Entry* MockBackend::lookup(const GenerationRequest& r) const {
  const std::string prefix = std::string(to_string(r.template_id)) + "|";
  std::vector<std::string> keys;
  if (!r.context_key.empty()) keys.push_back(prefix + r.context_key);
  for (const auto& k : r.fallback_keys) keys.push_back(prefix + k);
  keys.push_back(prefix + text::hex64(text::fnv1a64(r.user)));
  keys.push_back(prefix + "*");
  for (const auto& k : keys) {
    if (auto it = table_.find(k); it != table_.end()) return &it->second;
  }
  return nullptr;
}

std::string MockBackend::generate(const GenerationRequest& request) {
  {
    std::lock_guard lock(mutex_);
    log_.push_back(request);
  }
  if (const Entry* e = lookup(request)) {
    if (e->delay.count() > 0) std::this_thread::sleep_for(e->delay);
    return e->text;
  }
  if (options_.strict) {
    throw Error(ErrorCode::BackendRefusal, "mock has no response for " +
                                               std::string(to_string(request.template_id)) + "|" +
                                               request.context_key);
  }
  return builtin_reply(request);
}

std::vector<GenerationRequest> MockBackend::requests() const {
  std::lock_guard lock(mutex_);
  return log_;
}

// --- Gateway ---------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<GenerationBackend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
  if (!backend_) throw Error(ErrorCode::InvalidArgument, "gateway needs a backend");
}

GenerationRequest Gateway::make_request(TemplateId id, Bindings bindings) const {
  const auto& t = prompt_template(id);
  const auto prompt = render(id, bindings);
  GenerationRequest r;
  r.template_id = id;
  r.system = prompt.system;
  r.user = prompt.user;
  r.temperature = t.temperature;
  if (auto it = options_.temperature_overrides.find(id); it != options_.temperature_overrides.end()) {
    r.temperature = it->second;
  }
  r.max_tokens = t.max_new_tokens;
  r.bindings = std::move(bindings);
  return r;
}

std::string Gateway::call(const GenerationRequest& request) {
  for (int attempt = 0;; ++attempt) {
    // The backend runs on its own thread so a stuck call cannot hold the
    // caller past the deadline; the thread finishes (and is discarded) later.
    auto promise = std::make_shared<std::promise<std::string>>();
    auto result = promise->get_future();
    std::thread([backend = backend_, request, promise] {
      try {
        promise->set_value(backend->generate(request));
      } catch (...) {
        promise->set_exception(std::current_exception());
      }
    }).detach();

    if (result.wait_for(options_.timeout) != std::future_status::ready) {
      throw Error(ErrorCode::BackendTimeout,
                  std::string(to_string(request.template_id)) + " request exceeded " +
                      std::to_string(options_.timeout.count()) + " ms");
    }
    try {
      return result.get();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BackendFailure || attempt >= options_.max_retries) throw;
      spdlog::warn("retrying {} after backend failure: {}", to_string(request.template_id),
                   e.what());
    }
  }
}

VideoDescription Gateway::describe_video(std::span<const Frame> frames) {
  if (!backend_->capabilities().accepts_frame_attachments) {
    throw Error(ErrorCode::InvalidArgument, "backend does not accept frame attachments");
  }
  if (frames.empty()) throw Error(ErrorCode::EmptyVideo, "no frames to describe");
  const auto key = frames_key(frames);
  const Bindings bindings{{"video_features", "<video>"}};

  auto ask = [&](TemplateId id) {
    auto req = make_request(id, bindings);
    req.context_key = key;
    req.attachments.assign(frames.begin(), frames.end());
    return text::trim(call(req));
  };

  VideoDescription out;
  const auto caption = ask(TemplateId::Caption);
  if (caption.empty()) throw ParseError("empty caption", caption);
  out.caption = text::truncate_words(caption, kCaptionWordCap);

  const auto objects_raw = ask(TemplateId::MainObjects);
  out.objects = parse_list(objects_raw);
  if (out.objects.empty()) throw ParseError("no objects in reply", objects_raw);

  const auto scene_raw = ask(TemplateId::SceneType);
  out.scene_keywords = parse_list(scene_raw);
  if (out.scene_keywords.empty()) throw ParseError("no scene keywords in reply", scene_raw);
  return out;
}

std::string Gateway::gen_question(Level level, std::string_view query,
                                  std::span<const VideoRecord> candidates) {
  Bindings bindings{{"text_query", std::string(query)}};
  TemplateId id = TemplateId::QuestionLevel0;
  switch (level) {
    case Level::OpenEnded: id = TemplateId::QuestionLevel0; break;
    case Level::Distinguishing: {
      if (candidates.empty()) {
        throw Error(ErrorCode::InvalidArgument, "level-1 questions need candidate videos");
      }
      id = TemplateId::QuestionLevel1;
      const auto used = candidates.first(std::min(candidates.size(), options_.level1_candidates));
      bindings.emplace("video_meta_info_list", meta_info_list(used));
      break;
    }
    case Level::Enrichment: id = TemplateId::QuestionLevel2; break;
  }
  const auto request = make_request(id, std::move(bindings));

  auto question = text::trim(call(request));
  if (question.empty()) throw Error(ErrorCode::EmptyGeneration, "backend returned no question");
  if (level == Level::Distinguishing && !starts_with_wh(question)) {
    auto retry = text::trim(call(request));
    if (!retry.empty()) question = std::move(retry);
    if (!starts_with_wh(question)) {
      spdlog::warn("level-1 question does not start with What/Where/Who: {}", question);
    }
  }
  return question;
}

std::string Gateway::simulate_answer(const VideoRecord& target, std::string_view question,
                                     std::size_t round) {
  auto request = make_request(TemplateId::SimulatedAnswer,
                              {{"video_features", meta_text(target)},
                               {"question", std::string(question)}});
  request.context_key = target.id + "|" + std::string(question);
  request.fallback_keys = {target.id + "|r" + std::to_string(round), target.id + "|*"};
  auto answer = text::trim(call(request));
  if (answer.empty()) throw Error(ErrorCode::EmptyGeneration, "backend returned no answer");
  return answer;
}

std::string Gateway::refine_query(std::string_view previous_query, std::string_view answer) {
  if (text::trim(previous_query).empty() || text::trim(answer).empty()) {
    throw Error(ErrorCode::InvalidArgument, "refinement needs a previous query and an answer");
  }
  const auto request = make_request(
      TemplateId::Refine,
      {{"pre_query", std::string(previous_query)}, {"cur_answer", std::string(answer)}});
  auto refined = text::trim(call(request));
  if (refined.empty()) throw Error(ErrorCode::EmptyGeneration, "backend returned no query");
  return text::truncate_words(refined, kQueryWordCap);
}

// --- helpers -----------------------------------------------------------------

std::vector<std::string> parse_list(std::string_view raw, std::size_t limit) {
  std::vector<std::string> items;
  std::string cur;
  auto flush = [&] {
    std::string item = text::trim(cur);
    cur.clear();
    // Leading bullets / numbering: "-", "*", "•", "1.", "2)".
    std::size_t i = 0;
    while (i < item.size()) {
      if (item[i] == '-' || item[i] == '*' || item[i] == ' ') {
        ++i;
      } else if (item.compare(i, 3, "\xE2\x80\xA2") == 0) {
        i += 3;
      } else if (std::isdigit(static_cast<unsigned char>(item[i]))) {
        std::size_t j = i;
        while (j < item.size() && std::isdigit(static_cast<unsigned char>(item[j]))) ++j;
        if (j < item.size() && (item[j] == '.' || item[j] == ')')) {
          i = j + 1;
        } else {
          break;
        }
      } else {
        break;
      }
    }
    item = text::trim(std::string_view(item).substr(i));
    while (!item.empty() && (item.back() == '.' || item.back() == ';')) item.pop_back();
    if (item.size() >= 2 && (item.front() == '\'' || item.front() == '"') &&
        item.back() == item.front()) {
      item = item.substr(1, item.size() - 2);
    }
    item = text::trim(item);
    if (!item.empty() && items.size() < limit) items.push_back(std::move(item));
  };
  for (char c : raw) {
    if (c == '\n' || c == ',') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return items;
}

std::string meta_text(const VideoRecord& record) {
  std::string out = "Caption: " + record.caption;
  if (!record.objects.empty()) out += "\nObjects: " + join(record.objects, ", ");
  if (!record.scene_keywords.empty()) out += "\nScene: " + join(record.scene_keywords, ", ");
  return out;
}

std::string meta_info_list(std::span<const VideoRecord> candidates) {
  std::string out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    out += "\n" + std::to_string(i + 1) + ". [" + c.id + "] caption: " + c.caption;
    if (!c.objects.empty()) out += "; objects: " + join(c.objects, ", ");
    if (!c.scene_keywords.empty()) out += "; scene: " + join(c.scene_keywords, ", ");
  }
  return out;
}

}  // namespace umivr
