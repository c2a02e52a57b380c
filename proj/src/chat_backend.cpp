#include <httplib.h>

#include "http_client.hpp"
#include "umivr/error.hpp"
#include "umivr/gateway.hpp"

namespace umivr {

namespace {

std::string pgm_bytes(const Frame& f) {
  std::string out = "P5\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n255\n";
  out.append(f.pixels.begin(), f.pixels.end());
  return out;
}

}  // namespace

ChatCompletionBackend::ChatCompletionBackend(Options options) : options_(std::move(options)) {
  if (options_.base_url.empty()) {
    throw Error(ErrorCode::InvalidArgument, "chat backend needs a base URL");
  }
}

BackendCapabilities ChatCompletionBackend::capabilities() const {
  return {!options_.accepts_frames, options_.accepts_frames};
}

nlohmann::json ChatCompletionBackend::request_body(const Options& options,
                                                   const GenerationRequest& request) {
  nlohmann::json user_content;
  if (options.accepts_frames && !request.attachments.empty()) {
    user_content = nlohmann::json::array();
    user_content.push_back({{"type", "text"}, {"text", request.user}});
    for (const auto& frame : request.attachments) {
      const auto url =
          "data:image/x-portable-graymap;base64," + httplib::detail::base64_encode(pgm_bytes(frame));
      user_content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
    }
  } else {
    user_content = request.user;
  }
  return nlohmann::json{
      {"model", options.model},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", request.system}},
                              {{"role", "user"}, {"content", user_content}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens}};
}

std::string ChatCompletionBackend::generate(const GenerationRequest& request) {
  const auto reply = detail::post_json(options_.base_url, "/chat/completions",
                                       request_body(options_, request), options_.api_key,
                                       options_.timeout);
  try {
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    if (content.is_null()) throw Error(ErrorCode::BackendRefusal, "backend returned no content");
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("unexpected chat completion reply: ") + e.what(), reply.dump());
  }
}

}  // namespace umivr
