#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "umivr/gateway.hpp"
#include "umivr/session.hpp"
#include "umivr/text_embedder.hpp"

namespace umivr {

struct ListenAddress {
  std::string host = "127.0.0.1";
  int port = 8080;
};

// Throws InvalidArgument unless `text` is "host:port" with 0 <= port < 65536.
ListenAddress parse_listen(const std::string& text);

struct BackendConfig {
  std::string kind = "mock";  // mock | http
  std::filesystem::path mock_table;
  bool mock_strict = false;
  std::string base_url;
  std::string model;
  std::string api_key_env = "UMIVR_API_KEY";
  bool accepts_frames = false;
  std::chrono::milliseconds timeout{60'000};
  std::map<TemplateId, double> temperatures;
};

struct EmbedderConfig {
  std::string kind = "hash";  // hash | http
  std::size_t dim = kDefaultDim;
  std::string base_url;
  std::string model;
};

struct ServiceConfig {
  ListenAddress listen;
  std::filesystem::path index_path;
  std::filesystem::path session_dir = "sessions";
  std::vector<std::string> cors_origins = {"http://localhost:5173", "http://127.0.0.1:5173"};
  BackendConfig backend;
  EmbedderConfig embedder;
  SessionConfig session;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

// Flat `key = value` lines; `#` starts a comment. Every key may be overridden
// by UMIVR_<KEY> (upper case, '.' replaced by '_'). Unknown keys are rejected.
ServiceConfig parse_config(const std::string& text, const EnvLookup& env = process_env);
ServiceConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env);

std::shared_ptr<GenerationBackend> make_backend(const BackendConfig& config,
                                                const EnvLookup& env = process_env);
std::shared_ptr<TextEmbedder> make_embedder(const EmbedderConfig& config,
                                            const BackendConfig& backend,
                                            const EnvLookup& env = process_env);
GatewayOptions gateway_options(const ServiceConfig& config);

}  // namespace umivr
