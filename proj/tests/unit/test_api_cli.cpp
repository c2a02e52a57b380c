#include <gtest/gtest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "fixtures.hpp"
#include "synthetic.hpp"
#include "umivr/config.hpp"
#include "umivr/error.hpp"
#include "umivr/frame_io.hpp"
#include "umivr/ingest.hpp"
#include "umivr/json.hpp"
#include "umivr/service.hpp"

using namespace umivr;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected umivr::Error";
  return ErrorCode::InvalidArgument;
}

std::optional<std::string> no_env(const std::string&) { return std::nullopt; }

std::shared_ptr<const VectorIndex> synthetic_index(const TextEmbedder& embedder) {
  const auto corpus = testkit::make_synthetic_corpus();
  return std::make_shared<const VectorIndex>(extend_index(VectorIndex(embedder.dim()), corpus.records, embedder));
}

// Runs a Service on a free port for the lifetime of the object.
class LiveService {
 public:
  explicit LiveService(nlohmann::json mock_table = nlohmann::json::object(), ServiceConfig cfg = {}) {
    cfg.session_dir = dir_.path() / "sessions";
    session_dir_ = cfg.session_dir;
    auto embedder = std::make_shared<HashEmbedder>();
    auto gateway = std::make_shared<Gateway>(std::make_shared<MockBackend>(std::move(mock_table)));
    service_ = std::make_unique<Service>(cfg, synthetic_index(*embedder), embedder, gateway);
    port_ = service_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { service_->run(); });
    service_->wait_until_ready();
  }
  ~LiveService() {
    service_->stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10, 0);
    return c;
  }
  const fs::path& session_dir() const { return session_dir_; }

 private:
  testkit::TempDir dir_;
  fs::path session_dir_;
  std::unique_ptr<Service> service_;
  int port_ = 0;
  std::thread thread_;
};

json body_of(const httplib::Result& r) {
  EXPECT_TRUE(r) << "no response";
  return r ? json::parse(r->body) : json();
}

json post(httplib::Client& c, const std::string& path, const json& body, int expected_status) {
  auto r = c.Post(path, body.dump(), "application/json");
  EXPECT_TRUE(r);
  if (!r) return {};
  EXPECT_EQ(r->status, expected_status) << path << " " << r->body;
  return json::parse(r->body);
}

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args, const std::string& stdin_text = "") {
  std::string cmd = std::string(UMIVR_CLI_PATH) + " " + args + " 2>/dev/null";
  if (!stdin_text.empty() || args.find("session") == 0) {
    cmd = "printf '" + stdin_text + "' | " + cmd;
  }
  RunResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

// --- HTTP status mapping ------------------------------------------------------

TEST(HttpStatus, ErrorCodeMapping) {
  EXPECT_EQ(http_status(ErrorCode::EmptyQuery), 400);
  EXPECT_EQ(http_status(ErrorCode::MissingAnswer), 400);
  EXPECT_EQ(http_status(ErrorCode::UnknownId), 404);
  EXPECT_EQ(http_status(ErrorCode::WrongStatus), 409);
  EXPECT_EQ(http_status(ErrorCode::BackendTimeout), 502);
  EXPECT_EQ(http_status(ErrorCode::ParseFailure), 502);
  EXPECT_EQ(http_status(ErrorCode::Io), 500);
}

// --- service -------------------------------------------------------------------

TEST(Service, HealthAndUnknownRoutes) {
  LiveService svc;
  auto c = svc.client();
  const auto h = body_of(c.Get("/v1/health"));
  EXPECT_EQ(h.at("status"), "ok");
  EXPECT_EQ(h.at("videos"), 20);
  auto missing = c.Get("/v1/nope");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(json::parse(missing->body).at("code"), "not_found");
  auto unknown = c.Get("/v1/sessions/doesnotexist");
  ASSERT_TRUE(unknown);
  EXPECT_EQ(unknown->status, 404);
  EXPECT_EQ(json::parse(unknown->body).at("code"), "unknown_id");
}

TEST(Service, SearchRanksCaptionMatchFirst) {
  LiveService svc;
  auto c = svc.client();
  const auto corpus = testkit::make_synthetic_corpus();
  const auto r = c.Get("/v1/search?q=" + httplib::detail::encode_url(corpus.records[5].caption) + "&k=3");
  const auto j = body_of(r);
  ASSERT_EQ(j.at("results").size(), 3u);
  EXPECT_EQ(j.at("results")[0].at("id"), "v05");
  EXPECT_TRUE(j.at("report").contains("tas"));
  EXPECT_EQ(c.Get("/v1/search?q=")->status, 400);
  EXPECT_EQ(c.Get("/v1/search?q=x&k=0")->status, 400);
}

TEST(Service, SessionLifecycle) {
  LiveService svc(json{{"q_level0|*", "What is the person doing?"}});
  auto c = svc.client();
  const auto created = post(c, "/v1/sessions", {{"query", "a person"}}, 200);
  const auto id = created.at("session_id").get<std::string>();
  EXPECT_EQ(created.at("state").at("round"), 0);
  EXPECT_TRUE(fs::exists(svc.session_dir() / (id + ".json")));
  if (created.at("state").at("status") == "awaiting_answer") {
    EXPECT_TRUE(created.at("state").at("pending_question").is_string());
  }
  post(c, "/v1/sessions/" + id + "/answer", {{"answer", "g1t0 g1t2"}}, 200);
  const auto second = post(c, "/v1/sessions/" + id + "/answer", {{"answer", "u5a"}}, 200);
  EXPECT_EQ(second.at("state").at("round"), 2);
  EXPECT_EQ(second.at("state").at("history").size(), 2u);
  const auto fetched = body_of(c.Get("/v1/sessions/" + id));
  EXPECT_EQ(fetched.at("state"), second.at("state"));
  const auto bad = post(c, "/v1/sessions/" + id + "/answer", json::object(), 400);
  EXPECT_EQ(bad.at("code"), "missing_answer");
}

TEST(Service, TerminalSessionRejectsAnswers) {
  LiveService svc;
  auto c = svc.client();
  const auto created = post(c, "/v1/sessions", {{"query", "a person"}, {"config", {{"max_rounds", 1}}}}, 200);
  const auto id = created.at("session_id").get<std::string>();
  const auto done = post(c, "/v1/sessions/" + id + "/answer", {{"answer", "g0t1"}}, 200);
  EXPECT_EQ(done.at("state").at("status"), "exhausted");
  const auto again = post(c, "/v1/sessions/" + id + "/answer", {{"answer", "more"}}, 409);
  EXPECT_EQ(again.at("code"), "wrong_status");
}

TEST(Service, CreateValidation) {
  LiveService svc;
  auto c = svc.client();
  EXPECT_EQ(post(c, "/v1/sessions", {{"query", "  "}}, 400).at("code"), "empty_query");
  EXPECT_EQ(post(c, "/v1/sessions", json::object(), 400).at("code"), "empty_query");
  post(c, "/v1/sessions", {{"query", "q"}, {"config", {{"max_rounds", 0}}}}, 400);
  auto r = c.Post("/v1/sessions", "{broken", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
}

TEST(Service, ConcurrentAnswersOnOneSessionSerialize) {
  LiveService svc(json{{"refine|*", {{"text", "a person g2t0"}, {"delay_ms", 600}}}});
  auto c = svc.client();
  const auto id = post(c, "/v1/sessions", {{"query", "a person"}}, 200).at("session_id").get<std::string>();
  int first = 0;
  std::thread slow([&] {
    auto c1 = svc.client();
    auto r = c1.Post("/v1/sessions/" + id + "/answer", json{{"answer", "one"}}.dump(), "application/json");
    first = r ? r->status : -1;
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(150));
  auto r2 = c.Post("/v1/sessions/" + id + "/answer", json{{"answer", "two"}}.dump(), "application/json");
  slow.join();
  ASSERT_TRUE(r2);
  EXPECT_EQ(first, 200);
  EXPECT_EQ(r2->status, 409);
  EXPECT_EQ(json::parse(r2->body).at("code"), "session_busy");
  EXPECT_EQ(body_of(c.Get("/v1/sessions/" + id)).at("state").at("round"), 1);
}

TEST(Service, IngestSwapsIndex) {
  LiveService svc;
  auto c = svc.client();
  const json rec{{"id", "new1"}, {"caption", "a purple elephant dances"}, {"objects", {"elephant"}}};
  const auto added = post(c, "/v1/ingest", {{"records", {rec}}}, 201);
  EXPECT_EQ(added.at("added"), 1);
  EXPECT_EQ(added.at("size"), 21);
  EXPECT_EQ(body_of(c.Get("/v1/health")).at("videos"), 21);
  const auto s = body_of(c.Get("/v1/search?q=purple%20elephant&k=1"));
  EXPECT_EQ(s.at("results")[0].at("id"), "new1");
  EXPECT_EQ(post(c, "/v1/ingest", {{"records", {rec}}}, 400).at("code"), "duplicate_id");
  post(c, "/v1/ingest", {{"nothing", 1}}, 400);
}

TEST(Service, Cors) {
  LiveService svc;
  auto c = svc.client();
  auto allowed = c.Get("/v1/health", {{"Origin", "http://localhost:5173"}});
  ASSERT_TRUE(allowed);
  EXPECT_EQ(allowed->get_header_value("Access-Control-Allow-Origin"), "http://localhost:5173");
  auto denied = c.Get("/v1/health", {{"Origin", "http://evil.example"}});
  ASSERT_TRUE(denied);
  EXPECT_FALSE(denied->has_header("Access-Control-Allow-Origin"));
  auto pre = c.Options("/v1/sessions", {{"Origin", "http://127.0.0.1:5173"}});
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);
  EXPECT_EQ(pre->get_header_value("Access-Control-Allow-Origin"), "http://127.0.0.1:5173");
}

// --- config --------------------------------------------------------------------

TEST(Config, ParsesKeysAndComments) {
  const auto cfg = parse_config(
      "# service\n"
      "listen = 0.0.0.0:9000\n"
      "index = data/index.bin   # trailing comment\n"
      "backend = mock\n"
      "mock_strict = true\n"
      "alpha = 0.6\n"
      "k_mus = 7\n"
      "max_rounds = 4\n"
      "early_stop = yes\n"
      "complexity_adjustment = off\n"
      "cors = http://a, http://b\n"
      "temperature.sim_answer = 0.9\n",
      no_env);
  EXPECT_EQ(cfg.listen.host, "0.0.0.0");
  EXPECT_EQ(cfg.listen.port, 9000);
  EXPECT_EQ(cfg.index_path, "data/index.bin");
  EXPECT_TRUE(cfg.backend.mock_strict);
  EXPECT_DOUBLE_EQ(cfg.session.uncertainty.alpha, 0.6);
  EXPECT_EQ(cfg.session.uncertainty.k_mus, 7u);
  EXPECT_EQ(cfg.session.max_rounds, 4u);
  EXPECT_TRUE(cfg.session.early_stop);
  EXPECT_FALSE(cfg.session.uncertainty.tas_options.complexity_adjustment);
  EXPECT_EQ(cfg.cors_origins, (std::vector<std::string>{"http://a", "http://b"}));
  EXPECT_DOUBLE_EQ(gateway_options(cfg).temperature_overrides.at(TemplateId::SimulatedAnswer), 0.9);
}

TEST(Config, EnvironmentOverrides) {
  const EnvLookup env = [](const std::string& name) -> std::optional<std::string> {
    if (name == "UMIVR_ALPHA") return "0.3";
    if (name == "UMIVR_TEMPERATURE_REFINE") return "0.5";
    if (name == "UMIVR_LISTEN") return "127.0.0.1:0";
    return std::nullopt;
  };
  const auto cfg = parse_config("alpha = 0.9\n", env);
  EXPECT_DOUBLE_EQ(cfg.session.uncertainty.alpha, 0.3);
  EXPECT_EQ(cfg.listen.port, 0);
  EXPECT_DOUBLE_EQ(cfg.backend.temperatures.at(TemplateId::Refine), 0.5);
}

TEST(Config, Rejections) {
  EXPECT_EQ(code_of([] { parse_config("nonsense = 1\n", no_env); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_config("alpha = high\n", no_env); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_config("alpha = 2\n", no_env); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_config("backend = cloud\n", no_env); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_config("no equals sign\n", no_env); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_listen("localhost"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_listen("h:70000"); }), ErrorCode::InvalidArgument);
}

TEST(Config, BackendFactories) {
  testkit::TempDir dir;
  std::ofstream(dir / "mock.json") << R"({"q_level0|*": "from file"})";
  BackendConfig b;
  b.mock_table = dir / "mock.json";
  Gateway g(make_backend(b, no_env));
  EXPECT_EQ(g.gen_question(Level::OpenEnded, "q"), "from file");
  b.kind = "http";
  b.base_url = "http://127.0.0.1:1/v1";
  EXPECT_FALSE(make_backend(b, no_env)->capabilities().accepts_frame_attachments);
  EmbedderConfig e;
  e.dim = 64;
  EXPECT_EQ(make_embedder(e, b, no_env)->dim(), 64u);
}

// --- CLI -----------------------------------------------------------------------

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto corpus = testkit::make_synthetic_corpus();
    std::ofstream recs(dir / "records.jsonl");
    for (const auto& r : corpus.records) recs << json(r).dump() << "\n";
    std::ofstream bench(dir / "bench.jsonl");
    for (const auto& q : corpus.queries) {
      bench << json{{"query_id", q.query_id}, {"text", q.text}, {"target_id", q.target_id}}.dump() << "\n";
    }
    std::ofstream(dir / "mock.json") << corpus.mock_table.dump();
    std::ofstream(dir / "umivr.conf") << "index = " << (dir / "index.bin").string() << "\n"
                                      << "mock_table = " << (dir / "mock.json").string() << "\n";
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }

  testkit::TempDir dir;
};

TEST_F(Cli, IngestThenEvalWritesReports) {
  const auto ing = run_cli("ingest --in " + path("records.jsonl") + " --config " + path("umivr.conf"));
  ASSERT_EQ(ing.exit_code, 0) << ing.out;
  EXPECT_EQ(json::parse(ing.out).at("size"), 20);
  EXPECT_TRUE(fs::exists(dir / "index.bin.meta.jsonl") || fs::exists(VectorIndex::meta_path(dir / "index.bin")));

  const auto ev = run_cli("eval --bench " + path("bench.jsonl") + " --config " + path("umivr.conf") + " --out " +
                          path("out"));
  ASSERT_EQ(ev.exit_code, 0) << ev.out;
  EXPECT_EQ(json::parse(ev.out).at("evaluated"), 10);
  std::ifstream csv(dir / "out" / "report.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 11);
  EXPECT_TRUE(fs::exists(dir / "out" / "traces.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));
}

TEST_F(Cli, SessionEmptyQueryExitsOne) {
  EXPECT_EQ(run_cli("session --query '' --config " + path("umivr.conf")).exit_code, 1);
  EXPECT_EQ(run_cli("eval --bench " + path("bench.jsonl")).exit_code, 1);  // --out missing
}

TEST_F(Cli, SessionInteractiveLoop) {
  ASSERT_EQ(run_cli("ingest --in " + path("records.jsonl") + " --config " + path("umivr.conf")).exit_code, 0);
  const auto r = run_cli("session --query 'a person' --config " + path("umivr.conf"), "g1t0\\ndone\\n");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 3u) << r.out;
  EXPECT_EQ(json::parse(lines[0]).at("round"), 0);
  EXPECT_EQ(json::parse(lines[1]).at("round"), 1);
  EXPECT_EQ(json::parse(lines[2]).at("status"), "completed");
}

TEST_F(Cli, MissingIndexIsFailure) {
  EXPECT_EQ(run_cli("session --query x --index " + path("absent.bin")).exit_code, 2);
}

TEST_F(Cli, TqfsRecoversPlantedFrames) {
  const auto pv = testkit::planted_video();
  fs::create_directories(dir / "frames");
  for (const auto& f : pv.video.frames) {
    write_pgm(dir / "frames" / (std::to_string(std::llround(f.timestamp * 1000)) + ".pgm"), f);
  }
  const auto r = run_cli("tqfs --frames " + path("frames"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j.at("timestamps").get<std::vector<double>>(), pv.planted);
  EXPECT_EQ(j.at("indices").size(), 8u);
}
