#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "umivr/gateway.hpp"
#include "umivr/index.hpp"
#include "umivr/text_embedder.hpp"
#include "umivr/uncertainty.hpp"

namespace umivr {

enum class AnswerMode { Human, Simulated };

struct SessionConfig {
  UncertaintyConfig uncertainty;  // alpha, beta, k_tas, k_mus, tau, TAS options
  std::size_t max_rounds = 10;
  bool early_stop = false;
  double alpha_stop = 0.4;
  double beta_stop = 0.2;
  std::size_t display_k = 10;  // ranked list kept per round
  std::size_t level1_candidates = 5;
  AnswerMode answer_mode = AnswerMode::Human;

  // Throws InvalidArgument unless thresholds lie in [0, 1] and
  // 1 <= max_rounds <= 50.
  void validate() const;

  friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

enum class SessionStatus { AwaitingAnswer, StoppedEarly, Exhausted, Completed };

std::string_view to_string(SessionStatus status) noexcept;
SessionStatus status_from_string(std::string_view name);
std::string_view to_string(AnswerMode mode) noexcept;
AnswerMode answer_mode_from_string(std::string_view name);

struct Turn {
  std::string question;
  std::string answer;
  std::string refined_query;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct SessionState {
  std::string session_id;
  SessionConfig config;
  std::string initial_query;
  std::size_t round = 0;
  std::string current_query;
  std::vector<Turn> history;                 // one entry per completed round
  std::vector<UncertaintyReport> reports;    // round + 1 entries
  std::vector<SimilarityList> ranks;         // round + 1 snapshots
  SessionStatus status = SessionStatus::AwaitingAnswer;
  std::optional<std::string> pending_question;
  // Evaluation only: the ground-truth video and its 1-based rank per round.
  std::optional<std::string> target_id;
  std::vector<std::size_t> target_ranks;

  bool terminal() const noexcept { return status != SessionStatus::AwaitingAnswer; }

  friend bool operator==(const SessionState&, const SessionState&) = default;
};

// Read-only collaborators shared by every session.
struct SessionContext {
  const VectorIndex& index;
  const TextEmbedder& embedder;
  Gateway& gateway;
};

// Round 0: retrieve, score TAS/MUS, route the level. Throws EmptyQuery,
// EmptyIndex, MissingTarget (target_id not indexed).
SessionState start(const SessionConfig& config, const std::string& query,
                   const SessionContext& ctx, std::optional<std::string> target_id = std::nullopt,
                   std::string session_id = {});

// Generates (once per round) the clarifying question for the routed level and
// stores it as pending. On error the state is left untouched.
std::string question(SessionState& state, const SessionContext& ctx);

// Steps 3-5: obtain the answer (from the user, or simulated against the
// target), refine, re-retrieve and re-score. Returns the next state; the input
// state is not modified, so a backend error consumes no round.
SessionState answer(const SessionState& state, std::optional<std::string> user_answer,
                    const SessionContext& ctx);

// Marks an open session as completed (the user accepted the results).
SessionState close(const SessionState& state);

inline constexpr int kSnapshotVersion = 1;

nlohmann::json snapshot(const SessionState& state);
// Throws ParseFailure on a malformed or wrong-version document.
SessionState load_snapshot(const nlohmann::json& doc);
void save_snapshot(const SessionState& state, const std::filesystem::path& path);
SessionState load_snapshot_file(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const SessionConfig& c);
void from_json(const nlohmann::json& j, SessionConfig& c);

}  // namespace umivr
