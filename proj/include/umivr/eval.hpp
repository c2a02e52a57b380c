#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "umivr/session.hpp"

namespace umivr {

// Rank of the target after each round; ranks[0] is the initial query.
struct RankTrace {
  std::string query_id;
  std::string target_id;
  std::vector<std::size_t> ranks;  // 1-based

  friend bool operator==(const RankTrace&, const RankTrace&) = default;
};

// Fraction of traces with ranks[round] <= k.
double recall_at_k(std::span<const RankTrace> traces, std::size_t k, std::size_t round);
// Fraction of traces whose best rank over rounds 0..round is <= k.
double hit_at_k(std::span<const RankTrace> traces, std::size_t k, std::size_t round);
double mean_rank(std::span<const RankTrace> traces, std::size_t round);
// Lower median.
std::size_t median_rank(std::span<const RankTrace> traces, std::size_t round);
// Mean over traces of (1/T) * sum_{t=1..T} (log b_{t-1} + log b_t) / 2, with
// b_t the best rank over rounds 0..t. Lower is better; 0 iff always rank 1.
double bri(std::span<const RankTrace> traces, std::size_t rounds);

struct BenchQuery {
  std::string query_id;
  std::string text;
  std::string target_id;
};

// JSON lines: {"query_id", "text", "target_id"}.
std::vector<BenchQuery> read_bench(const std::filesystem::path& path);

struct QueryOutcome {
  std::string query_id;
  std::string target_id;
  bool ok = false;
  std::string error_code;
  std::string error_message;
  std::string status;
  std::size_t rounds_used = 0;
  std::vector<std::size_t> ranks;
  std::vector<double> tas;
  std::vector<double> mus;
  std::vector<std::string> queries;
};

struct RoundMetrics {
  std::size_t round = 0;
  double recall_1 = 0, recall_5 = 0, recall_10 = 0;
  double hit_1 = 0, hit_5 = 0, hit_10 = 0;
  double mean_rank = 0;
  std::size_t median_rank = 0;
  std::optional<double> bri;  // undefined at round 0
  double mean_tas = 0, mean_mus = 0;
  std::size_t active = 0;  // sessions still open when this round was scored
};

struct EvalReport {
  std::vector<RoundMetrics> rounds;
  std::size_t total = 0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  double mean_rounds = 0;
  double median_rounds = 0;
  SessionConfig config;
};

struct BenchmarkResult {
  EvalReport report;
  std::vector<QueryOutcome> outcomes;  // input order
  std::vector<RankTrace> traces;       // successful queries, unpadded
};

struct BenchmarkOptions {
  SessionConfig config;  // answer_mode is forced to simulated
  bool parallel = true;  // sessions fan out across OpenMP threads
};

// Replays one simulated session per query. Per-query failures are recorded
// and excluded from the aggregates. A session that ends before max_rounds
// keeps its last rank (and scores) for the remaining rounds.
BenchmarkResult run_benchmark(const VectorIndex& index, const TextEmbedder& embedder,
                              Gateway& gateway, std::span<const BenchQuery> queries,
                              const BenchmarkOptions& options);

EvalReport aggregate(std::span<const QueryOutcome> outcomes, const SessionConfig& config);

nlohmann::json report_json(const EvalReport& report);
// Rows are metrics, columns are rounds 0..max_rounds.
std::string report_csv(const EvalReport& report);
std::string traces_jsonl(std::span<const QueryOutcome> outcomes);
// Writes report.json, report.csv and traces.jsonl into `dir`.
void write_benchmark(const BenchmarkResult& result, const std::filesystem::path& dir);

}  // namespace umivr
