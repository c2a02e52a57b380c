#include "umivr/service.hpp"

#include <fstream>
#include <map>
#include <mutex>
#include <random>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "umivr/ingest.hpp"
#include "umivr/json.hpp"
#include "umivr/session.hpp"
#include "umivr/text.hpp"

namespace umivr {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownId:
      return 404;
    case ErrorCode::WrongStatus:
    case ErrorCode::EmptyIndex:
      return 409;
    case ErrorCode::BackendTimeout:
    case ErrorCode::BackendRefusal:
    case ErrorCode::BackendFailure:
    case ErrorCode::ParseFailure:
    case ErrorCode::EmptyGeneration:
      return 502;
    case ErrorCode::Io:
    case ErrorCode::FormatVersionMismatch:
    case ErrorCode::UnboundPlaceholder:
      return 500;
    default:
      return 400;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, json{{"code", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  try {
    auto j = json::parse(req.body.empty() ? std::string("{}") : req.body);
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("invalid JSON body: ") + e.what());
  }
}

bool valid_session_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (unsigned char c : id) {
    if (!std::isalnum(c) && c != '-' && c != '_') return false;
  }
  return true;
}

std::string new_session_id() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  std::shared_ptr<const TextEmbedder> embedder;
  std::shared_ptr<Gateway> gateway;
  httplib::Server server;

  mutable std::mutex index_mutex;
  std::shared_ptr<const VectorIndex> index;
  std::mutex ingest_mutex;

  std::mutex locks_mutex;
  std::map<std::string, std::shared_ptr<std::mutex>> session_locks;

  std::shared_ptr<const VectorIndex> current_index() const {
    std::lock_guard lock(index_mutex);
    return index;
  }

  std::shared_ptr<std::mutex> session_lock(const std::string& id) {
    std::lock_guard lock(locks_mutex);
    auto& m = session_locks[id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
  }

  std::filesystem::path session_path(const std::string& id) const {
    return config.session_dir / (id + ".json");
  }

  SessionState load_session(const std::string& id) const {
    if (!valid_session_id(id) || !std::filesystem::exists(session_path(id))) {
      throw Error(ErrorCode::UnknownId, "unknown session " + id);
    }
    return load_snapshot_file(session_path(id));
  }

  void save_session(const SessionState& s) const { save_snapshot(s, session_path(s.session_id)); }

  // Runs `fn`, mapping typed errors to their HTTP status.
  template <typename Fn>
  void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      const int status = http_status(e.code());
      if (status >= 500) spdlog::warn("request failed: {} ({})", e.what(), to_string(e.code()));
      send_error(res, status, to_string(e.code()), e.what());
    } catch (const std::exception& e) {
      spdlog::error("unexpected error: {}", e.what());
      send_error(res, 500, "internal", e.what());
    }
  }

  void health(httplib::Response& res) {
    const auto idx = current_index();
    send_json(res, 200, json{{"status", "ok"}, {"videos", idx->size()}, {"dim", idx->dim()}});
  }

  void search(const httplib::Request& req, httplib::Response& res) {
    const auto q = req.get_param_value("q");
    std::size_t k = 10;
    if (req.has_param("k")) {
      const auto raw = req.get_param_value("k");
      try {
        std::size_t used = 0;
        const long long v = std::stoll(raw, &used);
        if (used != raw.size() || v < 1) throw std::invalid_argument(raw);
        k = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "k must be a positive integer");
      }
    }
    if (text::trim(q).empty()) throw Error(ErrorCode::EmptyQuery, "q is empty");
    const auto idx = current_index();
    if (idx->empty()) throw Error(ErrorCode::EmptyIndex, "index is empty");
    const auto e = embedder->embed(q);
    const auto results = idx->top_k(e, k);
    const auto report = assess(*idx, e, q, config.session.uncertainty, 0);
    send_json(res, 200, json{{"results", results}, {"report", report}});
  }

  void ingest(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto it = body.find("records");
    if (it == body.end() || !it->is_array()) {
      throw Error(ErrorCode::InvalidArgument, "body needs a records array");
    }
    std::vector<VideoRecord> records;
    for (const auto& r : *it) records.push_back(ingest_item_from_json(r).record);

    std::lock_guard lock(ingest_mutex);
    auto next = std::make_shared<const VectorIndex>(extend_index(*current_index(), records, *embedder));
    if (!config.index_path.empty()) next->persist(config.index_path);
    {
      std::lock_guard swap(index_mutex);
      index = next;
    }
    spdlog::info("ingested {} records, index size {}", records.size(), next->size());
    send_json(res, 201, json{{"added", records.size()}, {"size", next->size()}});
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    if (!body.contains("query") || !body["query"].is_string()) {
      throw Error(ErrorCode::EmptyQuery, "body needs a query string");
    }
    SessionConfig sc = config.session;
    if (auto c = body.find("config"); c != body.end() && !c->is_null()) {
      if (!c->is_object()) throw Error(ErrorCode::InvalidArgument, "config must be an object");
      json merged = sc;
      merged.merge_patch(*c);
      try {
        sc = merged.get<SessionConfig>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad config: ") + e.what());
      }
    }
    std::optional<std::string> target;
    if (auto t = body.find("target_id"); t != body.end() && t->is_string()) target = t->get<std::string>();

    const auto idx = current_index();
    const SessionContext ctx{*idx, *embedder, *gateway};
    auto state = start(sc, body["query"].get<std::string>(), ctx, target, new_session_id());
    if (!state.terminal()) question(state, ctx);
    save_session(state);
    send_json(res, 200, json{{"session_id", state.session_id}, {"state", snapshot(state)}});
  }

  void answer_session(const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    const auto body = parse_body(req);
    std::optional<std::string> reply;
    if (auto a = body.find("answer"); a != body.end() && !a->is_null()) {
      if (!a->is_string()) throw Error(ErrorCode::InvalidArgument, "answer must be a string");
      reply = a->get<std::string>();
    }

    auto m = session_lock(id);
    std::unique_lock lock(*m, std::try_to_lock);
    if (!lock.owns_lock()) {
      send_error(res, 409, "session_busy", "session " + id + " is handling another request");
      return;
    }
    const auto current = load_session(id);
    const auto idx = current_index();
    const SessionContext ctx{*idx, *embedder, *gateway};
    auto next = answer(current, reply, ctx);
    if (!next.terminal()) question(next, ctx);
    save_session(next);
    send_json(res, 200, json{{"session_id", next.session_id}, {"state", snapshot(next)}});
  }

  void get_session(const httplib::Request& req, httplib::Response& res) {
    const auto s = load_session(req.matches[1].str());
    send_json(res, 200, json{{"session_id", s.session_id}, {"state", snapshot(s)}});
  }

  void cors(const httplib::Request& req, httplib::Response& res) const {
    const auto origin = req.get_header_value("Origin");
    if (origin.empty()) return;
    for (const auto& allowed : config.cors_origins) {
      if (allowed == origin || allowed == "*") {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        return;
      }
    }
  }

  void routes() {
    server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { health(res); });
    });
    server.Get("/v1/search", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { search(req, res); });
    });
    server.Post("/v1/ingest", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { ingest(req, res); });
    });
    server.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { create_session(req, res); });
    });
    server.Post(R"(/v1/sessions/([^/]+)/answer)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { answer_session(req, res); });
    });
    server.Get(R"(/v1/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { get_session(req, res); });
    });
    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      cors(req, res);
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, "not_found", "no such endpoint");
    });
  }
};

Service::Service(ServiceConfig config, std::shared_ptr<const VectorIndex> index,
                 std::shared_ptr<const TextEmbedder> embedder, std::shared_ptr<Gateway> gateway)
    : impl_(std::make_unique<Impl>()) {
  if (!index) throw Error(ErrorCode::InvalidArgument, "service needs an index");
  if (embedder->dim() != index->dim()) {
    throw Error(ErrorCode::DimensionMismatch, "embedder and index dimensions differ");
  }
  impl_->config = std::move(config);
  impl_->index = std::move(index);
  impl_->embedder = std::move(embedder);
  impl_->gateway = std::move(gateway);
  std::error_code ec;
  std::filesystem::create_directories(impl_->config.session_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create session dir: " + ec.message());
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

std::shared_ptr<const VectorIndex> Service::index() const { return impl_->current_index(); }

}  // namespace umivr
