#include "umivr/session.hpp"

#include <fstream>
#include <random>

#include "umivr/error.hpp"
#include "umivr/json.hpp"
#include "umivr/text.hpp"

namespace umivr {

namespace {

struct Retrieval {
  SimilarityList ranked;
  UncertaintyReport report;
  std::optional<std::size_t> target_rank;
};

Retrieval retrieve(const SessionConfig& config, const std::string& query,
                   const std::optional<std::string>& target, const SessionContext& ctx,
                   std::size_t round) {
  const auto embedding = ctx.embedder.embed(query);
  Retrieval r;
  r.ranked = ctx.index.top_k(embedding, config.display_k);
  r.report = assess(ctx.index, embedding, query, config.uncertainty, round);
  if (target) r.target_rank = ctx.index.rank_of(embedding, *target);
  return r;
}

SessionStatus next_status(const SessionConfig& config, const UncertaintyReport& report,
                          std::size_t round) {
  if (config.early_stop && report.tas < config.alpha_stop && report.mus < config.beta_stop) {
    return SessionStatus::StoppedEarly;
  }
  if (round >= config.max_rounds) return SessionStatus::Exhausted;
  return SessionStatus::AwaitingAnswer;
}

std::string random_session_id() {
  std::random_device rd;
  const auto hi = static_cast<std::uint64_t>(rd()) << 32;
  return text::hex64(hi | rd());
}

void check_threshold(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

void SessionConfig::validate() const {
  check_threshold(uncertainty.alpha, "alpha");
  check_threshold(uncertainty.beta, "beta");
  check_threshold(alpha_stop, "alpha_stop");
  check_threshold(beta_stop, "beta_stop");
  if (max_rounds < 1 || max_rounds > 50) {
    throw Error(ErrorCode::InvalidArgument, "max_rounds must lie in [1, 50]");
  }
  if (display_k == 0 || level1_candidates == 0 || uncertainty.k_tas == 0 ||
      uncertainty.k_mus == 0) {
    throw Error(ErrorCode::InvalidArgument, "window sizes must be positive");
  }
  if (!(uncertainty.tau > 0.0 && uncertainty.tau < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "tau must lie in (0, 1)");
  }
}

std::string_view to_string(SessionStatus status) noexcept {
  switch (status) {
    case SessionStatus::AwaitingAnswer: return "awaiting_answer";
    case SessionStatus::StoppedEarly: return "stopped_early";
    case SessionStatus::Exhausted: return "exhausted";
    case SessionStatus::Completed: return "completed";
  }
  return "awaiting_answer";
}

SessionStatus status_from_string(std::string_view name) {
  if (name == "awaiting_answer") return SessionStatus::AwaitingAnswer;
  if (name == "stopped_early") return SessionStatus::StoppedEarly;
  if (name == "exhausted") return SessionStatus::Exhausted;
  if (name == "completed") return SessionStatus::Completed;
  throw Error(ErrorCode::InvalidArgument, "unknown session status " + std::string(name));
}

std::string_view to_string(AnswerMode mode) noexcept {
  return mode == AnswerMode::Human ? "human" : "simulated";
}

AnswerMode answer_mode_from_string(std::string_view name) {
  if (name == "human") return AnswerMode::Human;
  if (name == "simulated") return AnswerMode::Simulated;
  throw Error(ErrorCode::InvalidArgument, "unknown answer mode " + std::string(name));
}

SessionState start(const SessionConfig& config, const std::string& query,
                   const SessionContext& ctx, std::optional<std::string> target_id,
                   std::string session_id) {
  config.validate();
  if (text::trim(query).empty()) throw Error(ErrorCode::EmptyQuery, "query is empty");
  if (ctx.index.empty()) throw Error(ErrorCode::EmptyIndex, "index is empty");
  if (target_id && !ctx.index.find(*target_id)) {
    throw Error(ErrorCode::MissingTarget, "target " + *target_id + " is not in the index");
  }

  SessionState s;
  s.session_id = session_id.empty() ? random_session_id() : std::move(session_id);
  s.config = config;
  s.initial_query = query;
  s.current_query = query;
  s.target_id = std::move(target_id);

  auto r = retrieve(config, query, s.target_id, ctx, 0);
  s.ranks.push_back(std::move(r.ranked));
  s.reports.push_back(r.report);
  if (r.target_rank) s.target_ranks.push_back(*r.target_rank);
  s.status = next_status(config, r.report, 0);
  return s;
}

std::string question(SessionState& state, const SessionContext& ctx) {
  if (state.status != SessionStatus::AwaitingAnswer) {
    throw Error(ErrorCode::WrongStatus,
                "session is " + std::string(to_string(state.status)) + ", not awaiting an answer");
  }
  if (state.pending_question) return *state.pending_question;

  const auto level = state.reports.back().level;
  std::vector<VideoRecord> candidates;
  if (level == Level::Distinguishing) {
    const auto& ranked = state.ranks.back();
    const auto n = std::min(ranked.size(), state.config.level1_candidates);
    for (std::size_t i = 0; i < n; ++i) {
      candidates.push_back(ctx.index.record(*ctx.index.find(ranked[i].id)));
    }
  }
  auto q = ctx.gateway.gen_question(level, state.current_query, candidates);
  state.pending_question = q;
  return q;
}

SessionState answer(const SessionState& state, std::optional<std::string> user_answer,
                    const SessionContext& ctx) {
  if (state.status != SessionStatus::AwaitingAnswer) {
    throw Error(ErrorCode::WrongStatus,
                "session is " + std::string(to_string(state.status)) + ", not awaiting an answer");
  }
  SessionState next = state;
  const std::string asked = question(next, ctx);

  std::string reply;
  if (state.config.answer_mode == AnswerMode::Human) {
    if (!user_answer || text::trim(*user_answer).empty()) {
      throw Error(ErrorCode::MissingAnswer, "an answer is required");
    }
    reply = text::trim(*user_answer);
  } else {
    if (!state.target_id) {
      throw Error(ErrorCode::MissingTarget, "simulated answers need a target video");
    }
    const auto& target = ctx.index.record(*ctx.index.find(*state.target_id));
    reply = ctx.gateway.simulate_answer(target, asked, state.history.size() + 1);
  }

  const auto refined = ctx.gateway.refine_query(state.current_query, reply);
  const std::size_t round = state.round + 1;
  auto r = retrieve(state.config, refined, state.target_id, ctx, round);

  next.round = round;
  next.current_query = refined;
  next.history.push_back({asked, reply, refined});
  next.ranks.push_back(std::move(r.ranked));
  next.reports.push_back(r.report);
  if (r.target_rank) next.target_ranks.push_back(*r.target_rank);
  next.pending_question.reset();
  next.status = next_status(state.config, r.report, round);
  return next;
}

SessionState close(const SessionState& state) {
  if (state.status != SessionStatus::AwaitingAnswer) {
    throw Error(ErrorCode::WrongStatus, "session is already finished");
  }
  SessionState next = state;
  next.status = SessionStatus::Completed;
  next.pending_question.reset();
  return next;
}

// --- snapshots ---------------------------------------------------------------

void to_json(nlohmann::json& j, const SessionConfig& c) {
  j = nlohmann::json{{"alpha", c.uncertainty.alpha},
                     {"beta", c.uncertainty.beta},
                     {"k_tas", c.uncertainty.k_tas},
                     {"k_mus", c.uncertainty.k_mus},
                     {"tau", c.uncertainty.tau},
                     {"complexity_adjustment", c.uncertainty.tas_options.complexity_adjustment},
                     {"complexity_gamma", c.uncertainty.tas_options.gamma},
                     {"complexity_reference_length", c.uncertainty.tas_options.reference_length},
                     {"max_rounds", c.max_rounds},
                     {"early_stop", c.early_stop},
                     {"alpha_stop", c.alpha_stop},
                     {"beta_stop", c.beta_stop},
                     {"display_k", c.display_k},
                     {"level1_candidates", c.level1_candidates},
                     {"answer_mode", to_string(c.answer_mode)}};
}

void from_json(const nlohmann::json& j, SessionConfig& c) {
  // Missing keys keep their defaults so partial override objects work.
  auto& u = c.uncertainty;
  u.alpha = j.value("alpha", u.alpha);
  u.beta = j.value("beta", u.beta);
  u.k_tas = j.value("k_tas", u.k_tas);
  u.k_mus = j.value("k_mus", u.k_mus);
  u.tau = j.value("tau", u.tau);
  u.tas_options.complexity_adjustment =
      j.value("complexity_adjustment", u.tas_options.complexity_adjustment);
  u.tas_options.gamma = j.value("complexity_gamma", u.tas_options.gamma);
  u.tas_options.reference_length =
      j.value("complexity_reference_length", u.tas_options.reference_length);
  c.max_rounds = j.value("max_rounds", c.max_rounds);
  c.early_stop = j.value("early_stop", c.early_stop);
  c.alpha_stop = j.value("alpha_stop", c.alpha_stop);
  c.beta_stop = j.value("beta_stop", c.beta_stop);
  c.display_k = j.value("display_k", c.display_k);
  c.level1_candidates = j.value("level1_candidates", c.level1_candidates);
  if (j.contains("answer_mode")) c.answer_mode = answer_mode_from_string(j.at("answer_mode").get<std::string>());
}

nlohmann::json snapshot(const SessionState& s) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& t : s.history) {
    history.push_back({{"question", t.question}, {"answer", t.answer}, {"refined_query", t.refined_query}});
  }
  return nlohmann::json{
      {"version", kSnapshotVersion},
      {"session_id", s.session_id},
      {"config", s.config},
      {"initial_query", s.initial_query},
      {"round", s.round},
      {"current_query", s.current_query},
      {"history", history},
      {"reports", s.reports},
      {"ranks", s.ranks},
      {"status", to_string(s.status)},
      {"pending_question", s.pending_question ? nlohmann::json(*s.pending_question) : nlohmann::json()},
      {"target_id", s.target_id ? nlohmann::json(*s.target_id) : nlohmann::json()},
      {"target_ranks", s.target_ranks}};
}

SessionState load_snapshot(const nlohmann::json& doc) {
  try {
    if (!doc.is_object() || doc.at("version").get<int>() != kSnapshotVersion) {
      throw ParseError("unsupported session snapshot version", doc.dump());
    }
    SessionState s;
    doc.at("session_id").get_to(s.session_id);
    s.config = doc.at("config").get<SessionConfig>();
    doc.at("initial_query").get_to(s.initial_query);
    doc.at("round").get_to(s.round);
    doc.at("current_query").get_to(s.current_query);
    for (const auto& t : doc.at("history")) {
      s.history.push_back({t.at("question").get<std::string>(), t.at("answer").get<std::string>(),
                           t.at("refined_query").get<std::string>()});
    }
    doc.at("reports").get_to(s.reports);
    doc.at("ranks").get_to(s.ranks);
    s.status = status_from_string(doc.at("status").get<std::string>());
    if (const auto& q = doc.at("pending_question"); !q.is_null()) s.pending_question = q.get<std::string>();
    if (const auto& t = doc.at("target_id"); !t.is_null()) s.target_id = t.get<std::string>();
    doc.at("target_ranks").get_to(s.target_ranks);
    if (s.reports.size() != s.round + 1 || s.ranks.size() != s.round + 1 ||
        s.history.size() != s.round) {
      throw ParseError("session snapshot is inconsistent with its round", doc.dump());
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed session snapshot: ") + e.what(), doc.dump());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("malformed session snapshot: ") + e.what(), doc.dump());
  }
}

void save_snapshot(const SessionState& state, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << snapshot(state).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "rename failed: " + path.string());
}

SessionState load_snapshot_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("session snapshot is not JSON: ") + e.what(), path.string());
  }
  return load_snapshot(doc);
}

}  // namespace umivr
