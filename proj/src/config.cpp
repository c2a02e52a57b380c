#include "umivr/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "umivr/error.hpp"
#include "umivr/text.hpp"

namespace umivr {

namespace {

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::InvalidArgument, key + ": expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, key + ": expected a number, got '" + v + "'");
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw Error(ErrorCode::InvalidArgument, key + ": expected a non-negative integer, got '" + v + "'");
  }
  try {
    return static_cast<std::size_t>(std::stoull(v));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, key + ": out of range");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = std::string(text::trim(item));
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string env_name(const std::string& key) {
  std::string out = "UMIVR_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> known_keys() {
  std::vector<std::string> keys = {
      "listen",     "index",      "session_dir", "cors",        "backend",    "mock_table",
      "mock_strict", "base_url",  "model",       "api_key_env", "accepts_frames", "timeout_ms",
      "embedder",   "embed_base_url", "embed_model", "dim",       "alpha",      "beta",
      "k_tas",      "k_mus",      "tau",         "max_rounds",  "early_stop", "alpha_stop",
      "beta_stop",  "display_k",  "level1_candidates", "complexity_adjustment"};
  for (auto id : kAllTemplates) keys.push_back("temperature." + std::string(to_string(id)));
  return keys;
}

void apply(ServiceConfig& c, const std::string& key, const std::string& v) {
  auto& u = c.session.uncertainty;
  if (key == "listen") c.listen = parse_listen(v);
  else if (key == "index") c.index_path = v;
  else if (key == "session_dir") c.session_dir = v;
  else if (key == "cors") c.cors_origins = split_list(v);
  else if (key == "backend") {
    if (v != "mock" && v != "http") throw Error(ErrorCode::InvalidArgument, "backend must be mock or http");
    c.backend.kind = v;
  } else if (key == "mock_table") c.backend.mock_table = v;
  else if (key == "mock_strict") c.backend.mock_strict = parse_bool(key, v);
  else if (key == "base_url") c.backend.base_url = v;
  else if (key == "model") c.backend.model = v;
  else if (key == "api_key_env") c.backend.api_key_env = v;
  else if (key == "accepts_frames") c.backend.accepts_frames = parse_bool(key, v);
  else if (key == "timeout_ms") c.backend.timeout = std::chrono::milliseconds(parse_size(key, v));
  else if (key == "embedder") {
    if (v != "hash" && v != "http") throw Error(ErrorCode::InvalidArgument, "embedder must be hash or http");
    c.embedder.kind = v;
  } else if (key == "embed_base_url") c.embedder.base_url = v;
  else if (key == "embed_model") c.embedder.model = v;
  else if (key == "dim") c.embedder.dim = parse_size(key, v);
  else if (key == "alpha") u.alpha = parse_double(key, v);
  else if (key == "beta") u.beta = parse_double(key, v);
  else if (key == "k_tas") u.k_tas = parse_size(key, v);
  else if (key == "k_mus") u.k_mus = parse_size(key, v);
  else if (key == "tau") u.tau = parse_double(key, v);
  else if (key == "complexity_adjustment") u.tas_options.complexity_adjustment = parse_bool(key, v);
  else if (key == "max_rounds") c.session.max_rounds = parse_size(key, v);
  else if (key == "early_stop") c.session.early_stop = parse_bool(key, v);
  else if (key == "alpha_stop") c.session.alpha_stop = parse_double(key, v);
  else if (key == "beta_stop") c.session.beta_stop = parse_double(key, v);
  else if (key == "display_k") c.session.display_k = parse_size(key, v);
  else if (key == "level1_candidates") c.session.level1_candidates = parse_size(key, v);
  else if (key.starts_with("temperature.")) {
    c.backend.temperatures[template_from_string(key.substr(12))] = parse_double(key, v);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  }
}

}  // namespace

ListenAddress parse_listen(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorCode::InvalidArgument, "listen address must be host:port, got '" + text + "'");
  }
  ListenAddress a;
  a.host = text.substr(0, colon);
  const auto port = text.substr(colon + 1);
  const auto p = parse_size("listen", port);
  if (p > 65535) throw Error(ErrorCode::InvalidArgument, "listen port out of range");
  a.port = static_cast<int>(p);
  return a;
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

ServiceConfig parse_config(const std::string& text, const EnvLookup& env) {
  ServiceConfig c;
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = std::string(text::trim(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument,
                  "config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply(c, std::string(text::trim(body.substr(0, eq))), std::string(text::trim(body.substr(eq + 1))));
  }
  for (const auto& key : known_keys()) {
    if (auto v = env(env_name(key))) apply(c, key, std::string(text::trim(*v)));
  }
  c.session.validate();
  return c;
}

ServiceConfig load_config(const std::filesystem::path& path, const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), env);
}

std::shared_ptr<GenerationBackend> make_backend(const BackendConfig& config, const EnvLookup& env) {
  if (config.kind == "mock") {
    MockBackend::Options opts{config.mock_strict, true};
    if (config.mock_table.empty()) return std::make_shared<MockBackend>(nlohmann::json::object(), opts);
    return MockBackend::from_file(config.mock_table, opts);
  }
  if (config.base_url.empty()) throw Error(ErrorCode::InvalidArgument, "http backend needs base_url");
  ChatCompletionBackend::Options opts;
  opts.base_url = config.base_url;
  opts.model = config.model;
  opts.api_key = env(config.api_key_env).value_or("");
  opts.accepts_frames = config.accepts_frames;
  opts.timeout = config.timeout;
  return std::make_shared<ChatCompletionBackend>(opts);
}

std::shared_ptr<TextEmbedder> make_embedder(const EmbedderConfig& config,
                                            const BackendConfig& backend, const EnvLookup& env) {
  if (config.kind == "hash") return std::make_shared<HashEmbedder>(config.dim);
  HttpEmbedder::Options opts;
  opts.base_url = config.base_url.empty() ? backend.base_url : config.base_url;
  if (opts.base_url.empty()) throw Error(ErrorCode::InvalidArgument, "http embedder needs embed_base_url");
  opts.model = config.model;
  opts.api_key = env(backend.api_key_env).value_or("");
  opts.dim = config.dim;
  opts.timeout = backend.timeout;
  return std::make_shared<HttpEmbedder>(opts);
}

GatewayOptions gateway_options(const ServiceConfig& config) {
  GatewayOptions g;
  g.timeout = config.backend.timeout;
  g.level1_candidates = config.session.level1_candidates;
  g.temperature_overrides = config.backend.temperatures;
  return g;
}

}  // namespace umivr
