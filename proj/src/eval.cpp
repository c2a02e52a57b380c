#include "umivr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "umivr/error.hpp"

namespace umivr {

namespace {

void check_round(std::span<const RankTrace> traces, std::size_t round) {
  if (traces.empty()) throw Error(ErrorCode::EmptyInput, "no traces");
  for (const auto& t : traces) {
    if (t.ranks.size() <= round) {
      throw Error(ErrorCode::RoundOutOfRange, "trace " + t.query_id + " has no round " +
                                                  std::to_string(round));
    }
  }
}

std::size_t best_through(const RankTrace& t, std::size_t round) {
  return *std::min_element(t.ranks.begin(), t.ranks.begin() + static_cast<std::ptrdiff_t>(round) + 1);
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << body;
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

// Pads a per-round series to `length` by repeating its last value.
template <typename T>
std::vector<T> carried(const std::vector<T>& v, std::size_t length) {
  std::vector<T> out(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(v.size(), length)));
  while (out.size() < length) out.push_back(v.back());
  return out;
}

QueryOutcome run_one(const VectorIndex& index, const TextEmbedder& embedder, Gateway& gateway,
                     const BenchQuery& q, const SessionConfig& config) {
  QueryOutcome o;
  o.query_id = q.query_id;
  o.target_id = q.target_id;
  try {
    if (!index.find(q.target_id)) {
      throw Error(ErrorCode::MissingTarget, "target " + q.target_id + " is not in the index");
    }
    const SessionContext ctx{index, embedder, gateway};
    auto state = start(config, q.text, ctx, q.target_id, q.query_id);
    while (!state.terminal()) state = answer(state, std::nullopt, ctx);

    o.ok = true;
    o.status = std::string(to_string(state.status));
    o.rounds_used = state.round;
    o.ranks = state.target_ranks;
    o.queries.push_back(state.initial_query);
    for (const auto& t : state.history) o.queries.push_back(t.refined_query);
    for (const auto& r : state.reports) {
      o.tas.push_back(r.tas);
      o.mus.push_back(r.mus);
    }
  } catch (const Error& e) {
    o.ok = false;
    o.error_code = std::string(to_string(e.code()));
    o.error_message = e.what();
  }
  return o;
}

}  // namespace

double recall_at_k(std::span<const RankTrace> traces, std::size_t k, std::size_t round) {
  check_round(traces, round);
  const auto hits = std::count_if(traces.begin(), traces.end(),
                                  [&](const RankTrace& t) { return t.ranks[round] <= k; });
  return static_cast<double>(hits) / static_cast<double>(traces.size());
}

double hit_at_k(std::span<const RankTrace> traces, std::size_t k, std::size_t round) {
  check_round(traces, round);
  const auto hits = std::count_if(traces.begin(), traces.end(),
                                  [&](const RankTrace& t) { return best_through(t, round) <= k; });
  return static_cast<double>(hits) / static_cast<double>(traces.size());
}

double mean_rank(std::span<const RankTrace> traces, std::size_t round) {
  check_round(traces, round);
  double sum = 0.0;
  for (const auto& t : traces) sum += static_cast<double>(t.ranks[round]);
  return sum / static_cast<double>(traces.size());
}

std::size_t median_rank(std::span<const RankTrace> traces, std::size_t round) {
  check_round(traces, round);
  std::vector<std::size_t> r;
  r.reserve(traces.size());
  for (const auto& t : traces) r.push_back(t.ranks[round]);
  const auto mid = r.begin() + static_cast<std::ptrdiff_t>((r.size() - 1) / 2);
  std::nth_element(r.begin(), mid, r.end());
  return *mid;
}

double bri(std::span<const RankTrace> traces, std::size_t rounds) {
  if (rounds == 0) throw Error(ErrorCode::InvalidArgument, "BRI needs at least one round");
  check_round(traces, rounds);
  double total = 0.0;
  for (const auto& t : traces) {
    double area = 0.0;
    double best = static_cast<double>(t.ranks[0]);
    double prev = std::log(best);
    for (std::size_t r = 1; r <= rounds; ++r) {
      best = std::min(best, static_cast<double>(t.ranks[r]));
      const double cur = std::log(best);
      area += 0.5 * (prev + cur);
      prev = cur;
    }
    total += area / static_cast<double>(rounds);
  }
  return total / static_cast<double>(traces.size());
}

std::vector<BenchQuery> read_bench(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<BenchQuery> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("query_id").get<std::string>(), j.at("text").get<std::string>(),
                     j.at("target_id").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, path.string() + ":" + std::to_string(line_no) +
                                                  ": " + e.what());
    }
  }
  return out;
}

BenchmarkResult run_benchmark(const VectorIndex& index, const TextEmbedder& embedder,
                              Gateway& gateway, std::span<const BenchQuery> queries,
                              const BenchmarkOptions& options) {
  SessionConfig config = options.config;
  config.answer_mode = AnswerMode::Simulated;
  config.validate();

  BenchmarkResult result;
  result.outcomes.resize(queries.size());
  const auto n = static_cast<std::ptrdiff_t>(queries.size());
  if (options.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      result.outcomes[u] = run_one(index, embedder, gateway, queries[u], config);
    }
  } else {
    for (std::size_t i = 0; i < queries.size(); ++i) {
      result.outcomes[i] = run_one(index, embedder, gateway, queries[i], config);
    }
  }
  for (const auto& o : result.outcomes) {
    if (o.ok) result.traces.push_back({o.query_id, o.target_id, o.ranks});
  }
  result.report = aggregate(result.outcomes, config);
  return result;
}

EvalReport aggregate(std::span<const QueryOutcome> outcomes, const SessionConfig& config) {
  EvalReport report;
  report.config = config;
  report.total = outcomes.size();
  const std::size_t columns = config.max_rounds + 1;

  std::vector<RankTrace> padded;
  std::vector<std::vector<double>> tas;
  std::vector<std::vector<double>> mus;
  std::vector<double> used;
  for (const auto& o : outcomes) {
    if (!o.ok || o.ranks.empty()) continue;
    padded.push_back({o.query_id, o.target_id, carried(o.ranks, columns)});
    tas.push_back(carried(o.tas, columns));
    mus.push_back(carried(o.mus, columns));
    used.push_back(static_cast<double>(o.rounds_used));
  }
  report.evaluated = padded.size();
  report.excluded = report.total - report.evaluated;
  if (padded.empty()) return report;

  report.mean_rounds = std::accumulate(used.begin(), used.end(), 0.0) / static_cast<double>(used.size());
  std::sort(used.begin(), used.end());
  const auto m = used.size();
  report.median_rounds = m % 2 ? used[m / 2] : 0.5 * (used[m / 2 - 1] + used[m / 2]);

  for (std::size_t r = 0; r < columns; ++r) {
    RoundMetrics rm;
    rm.round = r;
    rm.recall_1 = recall_at_k(padded, 1, r);
    rm.recall_5 = recall_at_k(padded, 5, r);
    rm.recall_10 = recall_at_k(padded, 10, r);
    rm.hit_1 = hit_at_k(padded, 1, r);
    rm.hit_5 = hit_at_k(padded, 5, r);
    rm.hit_10 = hit_at_k(padded, 10, r);
    rm.mean_rank = mean_rank(padded, r);
    rm.median_rank = median_rank(padded, r);
    if (r >= 1) rm.bri = bri(padded, r);
    for (std::size_t i = 0; i < padded.size(); ++i) {
      rm.mean_tas += tas[i][r];
      rm.mean_mus += mus[i][r];
    }
    rm.mean_tas /= static_cast<double>(padded.size());
    rm.mean_mus /= static_cast<double>(padded.size());
    rm.active = static_cast<std::size_t>(
        std::count_if(outcomes.begin(), outcomes.end(),
                      [&](const QueryOutcome& o) { return o.ok && o.ranks.size() > r; }));
    report.rounds.push_back(rm);
  }
  return report;
}

nlohmann::json report_json(const EvalReport& report) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& r : report.rounds) {
    rounds.push_back({{"round", r.round},
                      {"recall@1", r.recall_1},
                      {"recall@5", r.recall_5},
                      {"recall@10", r.recall_10},
                      {"hit@1", r.hit_1},
                      {"hit@5", r.hit_5},
                      {"hit@10", r.hit_10},
                      {"mnr", r.mean_rank},
                      {"mdr", r.median_rank},
                      {"bri", r.bri ? nlohmann::json(*r.bri) : nlohmann::json()},
                      {"mean_tas", r.mean_tas},
                      {"mean_mus", r.mean_mus},
                      {"active", r.active}});
  }
  return nlohmann::json{{"rounds", rounds},
                        {"total", report.total},
                        {"evaluated", report.evaluated},
                        {"excluded", report.excluded},
                        {"mean_rounds", report.mean_rounds},
                        {"median_rounds", report.median_rounds},
                        {"config", report.config}};
}

std::string report_csv(const EvalReport& report) {
  std::string out = "metric";
  for (const auto& r : report.rounds) out += "," + std::to_string(r.round);
  out += '\n';
  auto row = [&](const char* name, auto value) {
    out += name;
    for (const auto& r : report.rounds) out += "," + value(r);
    out += '\n';
  };
  row("recall@1", [](const RoundMetrics& r) { return number(r.recall_1); });
  row("recall@5", [](const RoundMetrics& r) { return number(r.recall_5); });
  row("recall@10", [](const RoundMetrics& r) { return number(r.recall_10); });
  row("hit@1", [](const RoundMetrics& r) { return number(r.hit_1); });
  row("hit@5", [](const RoundMetrics& r) { return number(r.hit_5); });
  row("hit@10", [](const RoundMetrics& r) { return number(r.hit_10); });
  row("mnr", [](const RoundMetrics& r) { return number(r.mean_rank); });
  row("mdr", [](const RoundMetrics& r) { return std::to_string(r.median_rank); });
  row("bri", [](const RoundMetrics& r) { return r.bri ? number(*r.bri) : std::string{}; });
  row("mean_tas", [](const RoundMetrics& r) { return number(r.mean_tas); });
  row("mean_mus", [](const RoundMetrics& r) { return number(r.mean_mus); });
  return out;
}

std::string traces_jsonl(std::span<const QueryOutcome> outcomes) {
  std::string out;
  for (const auto& o : outcomes) {
    nlohmann::json j{{"query_id", o.query_id}, {"target_id", o.target_id}, {"ok", o.ok}};
    if (o.ok) {
      j["status"] = o.status;
      j["rounds_used"] = o.rounds_used;
      j["ranks"] = o.ranks;
      j["tas"] = o.tas;
      j["mus"] = o.mus;
      j["queries"] = o.queries;
    } else {
      j["error"] = {{"code", o.error_code}, {"message", o.error_message}};
    }
    out += j.dump() + '\n';
  }
  return out;
}

void write_benchmark(const BenchmarkResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "report.json", report_json(result.report).dump(2) + '\n');
  write_text(dir / "report.csv", report_csv(result.report));
  write_text(dir / "traces.jsonl", traces_jsonl(result.outcomes));
}

}  // namespace umivr
