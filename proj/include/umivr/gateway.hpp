#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "umivr/index.hpp"
#include "umivr/prompts.hpp"
#include "umivr/tqfs.hpp"
#include "umivr/uncertainty.hpp"

namespace umivr {

struct GenerationRequest {
  TemplateId template_id = TemplateId::Caption;
  std::string system;
  std::string user;
  double temperature = 0.1;
  int max_tokens = 1024;
  // Operation-specific lookup key for keyed backends (frames hash,
  // "<video_id>|<question>", ...). Extra keys are tried in order.
  std::string context_key;
  std::vector<std::string> fallback_keys;
  Bindings bindings;
  std::vector<Frame> attachments;
};

struct BackendCapabilities {
  bool text_only = true;
  bool accepts_frame_attachments = false;
};

// Contract: generate() returns text or throws umivr::Error. Implementations
// must be safe to call from several threads.
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual BackendCapabilities capabilities() const = 0;
  virtual std::string generate(const GenerationRequest& request) = 0;
};

// Keyed response table. Lookup order for a request with template `t`:
//   "t|<context_key>", "t|<fallback_keys>...", "t|<fnv1a64 of user prompt>",
//   "t|*"; then, unless strict, a built-in default (the refine default echoes
//   "<pre_query> <cur_answer>"). A strict miss throws BackendRefusal.
// Table values are strings or {"text": ..., "delay_ms": N}.
class MockBackend final : public GenerationBackend {
 public:
  struct Options {
    bool strict = false;
    bool accepts_frame_attachments = true;
  };

  MockBackend(nlohmann::json table, Options options);
  explicit MockBackend(nlohmann::json table = nlohmann::json::object())
      : MockBackend(std::move(table), Options{}) {}
  static std::shared_ptr<MockBackend> from_file(const std::filesystem::path& path, Options options);

  BackendCapabilities capabilities() const override;
  std::string generate(const GenerationRequest& request) override;

  // Every request seen, in arrival order.
  std::vector<GenerationRequest> requests() const;

 private:
  struct Entry {
    std::string text;
    std::chrono::milliseconds delay{0};
  };

  const Entry* lookup(const GenerationRequest& request) const;

  std::map<std::string, Entry> table_;
  Options options_;
  mutable std::mutex mutex_;
  std::vector<GenerationRequest> log_;
};

// OpenAI-style chat completion over HTTP:
//   POST {base_url}/chat/completions
//   {model, messages: [{role, content}], temperature, max_tokens}
// Frames are sent as base64 PGM image parts when `accepts_frames` is set.
class ChatCompletionBackend final : public GenerationBackend {
 public:
  struct Options {
    std::string base_url;
    std::string model;
    std::string api_key;
    bool accepts_frames = false;
    std::chrono::milliseconds timeout{60'000};
  };

  explicit ChatCompletionBackend(Options options);

  BackendCapabilities capabilities() const override;
  std::string generate(const GenerationRequest& request) override;

  static nlohmann::json request_body(const Options& options, const GenerationRequest& request);

 private:
  Options options_;
};

struct VideoDescription {
  std::string caption;                      // <= 80 words
  std::vector<std::string> objects;         // <= 5
  std::vector<std::string> scene_keywords;  // <= 5
};

struct GatewayOptions {
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 1;  // transient BackendFailure retries per call
  std::size_t level1_candidates = 5;
  std::map<TemplateId, double> temperature_overrides;
};

// Splits a list-formatted reply ("1. man\n2. dog", "- a, - b", "man, dog")
// into at most `limit` items.
std::vector<std::string> parse_list(std::string_view raw, std::size_t limit = 5);

// Text substituted for {video_features} when no frames are attached.
std::string meta_text(const VideoRecord& record);
// Numbered candidate block for the Level-1 prompt.
std::string meta_info_list(std::span<const VideoRecord> candidates);

// All generation-dependent steps behind one backend. Every call honours the
// deadline: a backend that has not answered in time yields BackendTimeout.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<GenerationBackend> backend, GatewayOptions options = {});

  const GatewayOptions& options() const noexcept { return options_; }
  const std::shared_ptr<GenerationBackend>& backend() const noexcept { return backend_; }

  VideoDescription describe_video(std::span<const Frame> frames);

  // Level-1 requires at least one candidate; only the first
  // `level1_candidates` are used.
  std::string gen_question(Level level, std::string_view query,
                           std::span<const VideoRecord> candidates = {});

  std::string simulate_answer(const VideoRecord& target, std::string_view question,
                              std::size_t round);

  // Capped at 60 words.
  std::string refine_query(std::string_view previous_query, std::string_view answer);

  GenerationRequest make_request(TemplateId id, Bindings bindings) const;
  std::string call(const GenerationRequest& request);

 private:
  std::shared_ptr<GenerationBackend> backend_;
  GatewayOptions options_;
};

}  // namespace umivr
