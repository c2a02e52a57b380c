#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "umivr/config.hpp"
#include "umivr/error.hpp"
#include "umivr/eval.hpp"
#include "umivr/frame_io.hpp"
#include "umivr/ingest.hpp"
#include "umivr/json.hpp"
#include "umivr/service.hpp"
#include "umivr/session.hpp"
#include "umivr/text.hpp"
#include "umivr/tqfs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace umivr;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kFailure = 2;

bool g_pretty = false;

void emit(const json& j) {
  std::cout << (g_pretty ? j.dump(2) : j.dump()) << '\n' << std::flush;
}

ServiceConfig config_from(const std::string& path) {
  return path.empty() ? parse_config("") : load_config(path);
}

fs::path index_path(const ServiceConfig& cfg, const std::string& flag) {
  fs::path p = flag.empty() ? cfg.index_path : fs::path(flag);
  if (p.empty()) throw Error(ErrorCode::InvalidArgument, "no index path (use --index or config key 'index')");
  return p;
}

struct Runtime {
  std::shared_ptr<TextEmbedder> embedder;
  std::shared_ptr<Gateway> gateway;
};

Runtime runtime(const ServiceConfig& cfg) {
  return {make_embedder(cfg.embedder, cfg.backend),
          std::make_shared<Gateway>(make_backend(cfg.backend), gateway_options(cfg))};
}

int cmd_ingest(const std::string& in, const std::string& index_flag, const std::string& config,
               bool describe, const TqfsOptions& tqfs) {
  const auto cfg = config_from(config);
  const auto path = index_path(cfg, index_flag);
  const auto rt = runtime(cfg);
  const auto items = read_ingest_jsonl(in);

  std::vector<VideoRecord> records;
  for (const auto& item : items) {
    if (describe && item.frames) {
      records.push_back(describe_item(item, *rt.gateway, tqfs));
    } else {
      records.push_back(item.record);
    }
  }
  const VectorIndex base = fs::exists(path) ? VectorIndex::load(path) : VectorIndex(rt.embedder->dim());
  const auto next = extend_index(base, records, *rt.embedder);
  next.persist(path);
  emit(json{{"added", records.size()}, {"size", next.size()}, {"index", path.string()}});
  return kOk;
}

int cmd_tqfs(const std::string& frames, const TqfsOptions& opts, double fps) {
  Video video;
  if (frames == "-") {
    video.frames = read_frame_stream(std::cin);
  } else {
    video.frames = read_pgm_dir(frames);
  }
  video.fps = fps > 0 ? fps : estimate_fps(video.frames);
  const auto sel = select_frames(video, opts, thumbnail_embedding);
  emit(json{{"indices", sel.indices}, {"timestamps", sel.timestamps}, {"quality", sel.quality}});
  return kOk;
}

int cmd_serve(const std::string& config) {
  const auto cfg = config_from(config);
  const auto path = index_path(cfg, "");
  auto index = std::make_shared<const VectorIndex>(VectorIndex::load(path));
  const auto rt = runtime(cfg);
  Service service(cfg, index, rt.embedder, rt.gateway);
  const int port = service.bind(cfg.listen.host, cfg.listen.port);
  spdlog::info("serving {} videos on {}:{}", index->size(), cfg.listen.host, port);
  service.run();
  return kOk;
}

json round_view(const SessionState& s) {
  json results = json::array();
  for (const auto& e : s.ranks.back()) results.push_back(e);
  return json{{"session_id", s.session_id},
              {"round", s.round},
              {"status", to_string(s.status)},
              {"query", s.current_query},
              {"report", s.reports.back()},
              {"question", s.pending_question ? json(*s.pending_question) : json()},
              {"results", results}};
}

int cmd_session(const std::string& query, const std::string& index_flag, const std::string& config) {
  if (text::trim(query).empty()) throw Error(ErrorCode::EmptyQuery, "query is empty");
  const auto cfg = config_from(config);
  const auto index = VectorIndex::load(index_path(cfg, index_flag));
  const auto rt = runtime(cfg);
  const SessionContext ctx{index, *rt.embedder, *rt.gateway};

  auto state = start(cfg.session, query, ctx);
  while (!state.terminal()) {
    question(state, ctx);
    emit(round_view(state));
    std::string line;
    if (!std::getline(std::cin, line) || text::trim(line) == "done") {
      state = close(state);
      break;
    }
    if (text::trim(line).empty()) continue;
    state = answer(state, line, ctx);
  }
  emit(round_view(state));
  return kOk;
}

int cmd_eval(const std::string& bench, std::size_t rounds, const std::string& out,
             const std::string& index_flag, const std::string& config, bool early_stop, bool serial) {
  auto cfg = config_from(config);
  const auto index = VectorIndex::load(index_path(cfg, index_flag));
  const auto rt = runtime(cfg);
  const auto queries = read_bench(bench);

  BenchmarkOptions opts;
  opts.config = cfg.session;
  opts.config.max_rounds = rounds;
  if (early_stop) opts.config.early_stop = true;
  opts.parallel = !serial;
  const auto result = run_benchmark(index, *rt.embedder, *rt.gateway, queries, opts);
  write_benchmark(result, out);
  emit(report_json(result.report));
  return kOk;
}

int exit_code(ErrorCode code) {
  const int status = http_status(code);
  return status < 500 ? kValidation : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("umivr"));

  CLI::App app{"umivr: interactive text-to-video retrieval"};
  app.require_subcommand(1);
  app.add_flag("--pretty", g_pretty, "Indent JSON output");

  std::string in, index_flag, config, frames = ".", bench, out, query;
  bool describe = false, early_stop = false, serial = false;
  TqfsOptions tqfs;
  double fps = 0.0;
  std::size_t rounds = 10;

  auto* ingest = app.add_subcommand("ingest", "Embed records into an index");
  ingest->add_option("--in", in, "Records (JSON lines)")->required();
  ingest->add_option("--index", index_flag, "Index file");
  ingest->add_option("--config", config, "Config file");
  ingest->add_flag("--describe", describe, "Describe records that list a frames directory");
  ingest->add_option("--m", tqfs.bins, "TQFS bins");
  ingest->add_option("--k", tqfs.k, "TQFS key frames");

  auto* tq = app.add_subcommand("tqfs", "Select key frames");
  tq->add_option("--frames", frames, "Directory of <millis>.pgm frames, or - for a frame stream on stdin")
      ->required();
  tq->add_option("--m", tqfs.bins, "Bins");
  tq->add_option("--k", tqfs.k, "Key frames");
  tq->add_option("--seed", tqfs.seed, "k-means seed");
  tq->add_option("--r-prime", tqfs.r_prime, "Subsampling rate (frames/s)");
  tq->add_option("--fps", fps, "Source frame rate (default: estimated)");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", config, "Config file")->required();

  auto* sess = app.add_subcommand("session", "Interactive retrieval session");
  sess->add_option("--query", query, "Initial query")->required();
  sess->add_option("--index", index_flag, "Index file");
  sess->add_option("--config", config, "Config file");

  auto* ev = app.add_subcommand("eval", "Run a simulated benchmark");
  ev->add_option("--bench", bench, "Queries (JSON lines)")->required();
  ev->add_option("--rounds", rounds, "Interaction rounds");
  ev->add_option("--out", out, "Output directory")->required();
  ev->add_option("--index", index_flag, "Index file");
  ev->add_option("--config", config, "Config file");
  ev->add_flag("--early-stop", early_stop, "Stop sessions once uncertainty is low");
  ev->add_flag("--serial", serial, "Run sessions one at a time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (*ingest) return cmd_ingest(in, index_flag, config, describe, tqfs);
    if (*tq) return cmd_tqfs(frames, tqfs, fps);
    if (*serve) return cmd_serve(config);
    if (*sess) return cmd_session(query, index_flag, config);
    if (*ev) return cmd_eval(bench, rounds, out, index_flag, config, early_stop, serial);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kValidation;
}
