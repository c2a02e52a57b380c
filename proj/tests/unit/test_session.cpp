#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include "fixtures.hpp"
#include "synthetic.hpp"
#include "umivr/error.hpp"
#include "umivr/ingest.hpp"
#include "umivr/session.hpp"

using namespace umivr;
using testkit::basis;

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

constexpr std::size_t kDim = 8;

Embedding combo(std::vector<std::pair<std::size_t, double>> parts) {
  std::vector<double> v(kDim, 0.0);
  for (auto [axis, w] : parts) v[axis] += w;
  return normalize(std::span<const double>(v));
}

// Fixed embeddings per text; anything else maps to `fallback`.
class TableEmbedder final : public TextEmbedder {
 public:
  TableEmbedder(std::map<std::string, Embedding> table, Embedding fallback)
      : table_(std::move(table)), fallback_(std::move(fallback)) {}
  std::size_t dim() const override { return kDim; }
  Embedding embed(std::string_view text) const override {
    if (text.find_first_not_of(" \t\n") == std::string_view::npos) throw Error(ErrorCode::EmptyQuery, "empty");
    auto it = table_.find(std::string(text));
    return it == table_.end() ? fallback_ : it->second;
  }

 private:
  std::map<std::string, Embedding> table_;
  Embedding fallback_;
};

VideoRecord rec(const std::string& id) {
  VideoRecord r;
  r.id = id;
  r.caption = "caption of " + id;
  r.objects = {"thing"};
  r.scene_keywords = {"place"};
  return r;
}

// Seven videos in one tight caption cluster: e0 plus a small distinct offset.
VectorIndex tight_index() {
  VectorIndex idx(kDim);
  for (std::size_t i = 0; i < 7; ++i) idx.add(rec("t" + std::to_string(i)), combo({{0, 1.0}, {1 + i, 0.1}}));
  return idx;
}

// Four videos along orthogonal axes.
VectorIndex spread_index() {
  VectorIndex idx(kDim);
  for (std::size_t i = 0; i < 4; ++i) idx.add(rec("s" + std::to_string(i)), basis(kDim, i));
  return idx;
}

struct Harness {
  VectorIndex index;
  TableEmbedder embedder;
  std::shared_ptr<MockBackend> mock;
  Gateway gateway;
  SessionContext ctx() { return {index, embedder, gateway}; }

  Harness(VectorIndex idx, Embedding query_vec, nlohmann::json table = nlohmann::json::object())
      : index(std::move(idx)),
        embedder({}, std::move(query_vec)),
        mock(std::make_shared<MockBackend>(std::move(table))),
        gateway(mock) {}
};

Embedding enrichment_query() { return combo({{0, 1.0}, {1, 0.1}}); }           // equals t0
Embedding distinguishing_query() { return combo({{0, 2.0}, {1, 0.1}, {2, 0.1}}); }  // t0 and t1 tie
Embedding open_query() { return combo({{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}}); }

}  // namespace

TEST(SessionStart, RoutesOpenEndedForSpreadNeighbourhood) {
  Harness h(spread_index(), open_query());
  const auto s = start({}, "anything", h.ctx());
  EXPECT_EQ(s.round, 0u);
  EXPECT_EQ(s.status, SessionStatus::AwaitingAnswer);
  ASSERT_EQ(s.reports.size(), 1u);
  EXPECT_NEAR(s.reports[0].se_raw, std::log(4.0), 1e-9);
  EXPECT_DOUBLE_EQ(s.reports[0].tas, 1.0);
  EXPECT_EQ(s.reports[0].level, Level::OpenEnded);
  EXPECT_EQ(s.ranks.at(0).size(), 4u);
  EXPECT_FALSE(s.session_id.empty());
}

TEST(SessionStart, RoutesDistinguishingForTiedTopScores) {
  Harness h(tight_index(), distinguishing_query());
  const auto s = start({}, "anything", h.ctx(), std::nullopt, "fixed-id");
  EXPECT_EQ(s.session_id, "fixed-id");
  EXPECT_DOUBLE_EQ(s.reports[0].tas, 0.0);
  EXPECT_GT(s.reports[0].mus, 0.2);
  EXPECT_EQ(s.reports[0].level, Level::Distinguishing);
}

TEST(SessionStart, RoutesEnrichmentForConfidentMatch) {
  Harness h(tight_index(), enrichment_query());
  const auto s = start({}, "anything", h.ctx());
  EXPECT_DOUBLE_EQ(s.reports[0].tas, 0.0);
  EXPECT_NEAR(s.reports[0].mus, 0.0, 1e-12);
  EXPECT_EQ(s.reports[0].level, Level::Enrichment);
  EXPECT_EQ(s.ranks[0].at(0).id, "t0");
}

TEST(SessionStart, Errors) {
  Harness h(tight_index(), enrichment_query());
  EXPECT_EQ(code_of([&] { start({}, "   ", h.ctx()); }), ErrorCode::EmptyQuery);
  EXPECT_EQ(code_of([&] { start({}, "q", h.ctx(), std::string("nope")); }), ErrorCode::MissingTarget);
  SessionConfig bad;
  bad.max_rounds = 0;
  EXPECT_EQ(code_of([&] { start(bad, "q", h.ctx()); }), ErrorCode::InvalidArgument);
  Harness empty(VectorIndex(kDim), enrichment_query());
  EXPECT_EQ(code_of([&] { start({}, "q", empty.ctx()); }), ErrorCode::EmptyIndex);
}

TEST(SessionQuestion, UsesRoutedLevelAndIsGeneratedOnce) {
  Harness h(spread_index(), open_query(), {{"q_level0|*", "What else happens?"}});
  auto s = start({}, "q", h.ctx());
  EXPECT_EQ(question(s, h.ctx()), "What else happens?");
  EXPECT_EQ(question(s, h.ctx()), "What else happens?");
  EXPECT_EQ(h.mock->requests().size(), 1u);
  EXPECT_EQ(h.mock->requests()[0].template_id, TemplateId::QuestionLevel0);
  EXPECT_EQ(s.pending_question, "What else happens?");
}

TEST(SessionQuestion, Level1SeesTopCandidatesInRankOrder) {
  Harness h(tight_index(), distinguishing_query());
  SessionConfig c;
  c.level1_candidates = 3;
  auto s = start(c, "q", h.ctx());
  question(s, h.ctx());
  const auto requests = h.mock->requests();
  const auto& req = requests.at(0);
  EXPECT_EQ(req.template_id, TemplateId::QuestionLevel1);
  std::size_t prev = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto pos = req.user.find("[" + s.ranks[0][i].id + "]");
    ASSERT_NE(pos, std::string::npos);
    EXPECT_GT(pos, prev);
    prev = pos;
  }
  EXPECT_EQ(req.user.find("[" + s.ranks[0][3].id + "]"), std::string::npos);
}

TEST(SessionAnswer, AdvancesRoundAndRecordsTurn) {
  Harness h(spread_index(), open_query(), {{"q_level0|*", "What color?"}});
  const auto s0 = start({}, "a thing", h.ctx());
  const auto s1 = answer(s0, std::string("  it is red "), h.ctx());
  EXPECT_EQ(s0.round, 0u);  // input untouched
  EXPECT_EQ(s1.round, 1u);
  ASSERT_EQ(s1.history.size(), 1u);
  EXPECT_EQ(s1.history[0], (Turn{"What color?", "it is red", "a thing it is red"}));
  EXPECT_EQ(s1.current_query, "a thing it is red");
  EXPECT_EQ(s1.reports.size(), 2u);
  EXPECT_EQ(s1.ranks.size(), 2u);
  EXPECT_EQ(s1.reports[1].round, 1u);
  EXPECT_FALSE(s1.pending_question);
}

TEST(SessionAnswer, DiscriminativeAnswerImprovesTargetRank) {
  const auto corpus = testkit::make_synthetic_corpus();
  HashEmbedder embedder;
  const auto index = extend_index(VectorIndex(embedder.dim()), corpus.records, embedder);
  Gateway gateway(std::make_shared<MockBackend>());
  SessionContext ctx{index, embedder, gateway};
  const auto s0 = start({}, "a person", ctx, std::string("v06"));
  ASSERT_EQ(s0.target_ranks.size(), 1u);
  const auto s1 = answer(s0, std::string("g1t3 g1t4 g1t5"), ctx);
  const auto s2 = answer(s1, std::string("u6a u6b"), ctx);
  EXPECT_LE(s1.target_ranks[1], 4u);
  EXPECT_EQ(s2.target_ranks[2], 1u);
  EXPECT_LT(s2.target_ranks[2], s0.target_ranks[0]);
}

TEST(SessionAnswer, SimulatedModeAsksTheGatewayForTheTargetsAnswer) {
  Harness h(spread_index(), open_query(), {{"sim_answer|s2|r1", "blue sky"}});
  SessionConfig c;
  c.answer_mode = AnswerMode::Simulated;
  const auto s1 = answer(start(c, "q", h.ctx(), std::string("s2")), std::nullopt, h.ctx());
  EXPECT_EQ(s1.history.at(0).answer, "blue sky");
  EXPECT_EQ(s1.target_ranks.size(), 2u);
  EXPECT_EQ(code_of([&] { answer(start(c, "q", h.ctx()), std::nullopt, h.ctx()); }), ErrorCode::MissingTarget);
}

TEST(SessionAnswer, HumanModeRequiresAnswer) {
  Harness h(spread_index(), open_query());
  const auto s0 = start({}, "q", h.ctx());
  EXPECT_EQ(code_of([&] { answer(s0, std::nullopt, h.ctx()); }), ErrorCode::MissingAnswer);
  EXPECT_EQ(code_of([&] { answer(s0, std::string(" \n "), h.ctx()); }), ErrorCode::MissingAnswer);
}

TEST(SessionAnswer, BackendErrorConsumesNoRound) {
  Harness broken(spread_index(), open_query(), {{"refine|*", ""}});
  const auto s0 = start({}, "q", broken.ctx());
  EXPECT_EQ(code_of([&] { answer(s0, std::string("yes"), broken.ctx()); }), ErrorCode::EmptyGeneration);
  EXPECT_EQ(s0.round, 0u);
  EXPECT_TRUE(s0.history.empty());
  Harness ok(spread_index(), open_query());
  EXPECT_EQ(answer(s0, std::string("yes"), ok.ctx()).round, 1u);
}

TEST(SessionStatusFlow, StopsEarlyWhenBothScoresLow) {
  Harness h(tight_index(), enrichment_query());
  SessionConfig c;
  c.early_stop = true;
  auto s = start(c, "q", h.ctx());
  EXPECT_EQ(s.status, SessionStatus::StoppedEarly);
  EXPECT_TRUE(s.terminal());
  EXPECT_EQ(code_of([&] { question(s, h.ctx()); }), ErrorCode::WrongStatus);
  EXPECT_EQ(code_of([&] { answer(s, std::string("x"), h.ctx()); }), ErrorCode::WrongStatus);
  c.early_stop = false;
  EXPECT_EQ(start(c, "q", h.ctx()).status, SessionStatus::AwaitingAnswer);
}

TEST(SessionStatusFlow, ExhaustsAtRoundCap) {
  Harness h(spread_index(), open_query());
  SessionConfig c;
  c.max_rounds = 3;
  auto s = start(c, "q", h.ctx());
  for (int i = 0; i < 3; ++i) {
    ASSERT_EQ(s.status, SessionStatus::AwaitingAnswer);
    s = answer(s, std::string("more"), h.ctx());
  }
  EXPECT_EQ(s.round, 3u);
  EXPECT_EQ(s.status, SessionStatus::Exhausted);
  EXPECT_EQ(code_of([&] { answer(s, std::string("x"), h.ctx()); }), ErrorCode::WrongStatus);
}

TEST(SessionStatusFlow, CloseCompletesOpenSessionOnly) {
  Harness h(spread_index(), open_query());
  auto s = start({}, "q", h.ctx());
  question(s, h.ctx());
  const auto done = close(s);
  EXPECT_EQ(done.status, SessionStatus::Completed);
  EXPECT_FALSE(done.pending_question);
  EXPECT_EQ(code_of([&] { close(done); }), ErrorCode::WrongStatus);
}

TEST(SessionConfigValidate, Bounds) {
  SessionConfig c;
  EXPECT_NO_THROW(c.validate());
  c.max_rounds = 51;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidArgument);
  c = {};
  c.uncertainty.alpha = 1.5;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidArgument);
  c = {};
  c.beta_stop = -0.1;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidArgument);
}

TEST(SessionSnapshot, FreshStateRoundTrips) {
  Harness h(tight_index(), distinguishing_query());
  const auto s = start({}, "q", h.ctx(), std::string("t3"));
  const auto doc = snapshot(s);
  EXPECT_EQ(doc.at("version"), kSnapshotVersion);
  EXPECT_EQ(load_snapshot(nlohmann::json::parse(doc.dump())), s);
}

TEST(SessionSnapshot, ThreeRoundsRoundTripThroughFile) {
  Harness h(spread_index(), open_query(), {{"q_level0|*", "What now?"}});
  SessionConfig c;
  c.uncertainty.alpha = 0.45;
  c.display_k = 3;
  auto s = start(c, "q", h.ctx(), std::string("s1"));
  for (int i = 0; i < 3; ++i) s = answer(s, "answer " + std::to_string(i), h.ctx());
  question(s, h.ctx());
  ASSERT_TRUE(s.pending_question);
  testkit::TempDir dir;
  save_snapshot(s, dir / "s.json");
  const auto back = load_snapshot_file(dir / "s.json");
  EXPECT_EQ(back, s);
  EXPECT_EQ(back.config.uncertainty.alpha, 0.45);
  EXPECT_EQ(back.ranks.at(2).size(), 3u);
}

TEST(SessionSnapshot, CorruptDocumentsAreParseFailures) {
  Harness h(spread_index(), open_query());
  auto doc = snapshot(answer(start({}, "q", h.ctx()), std::string("a"), h.ctx()));
  auto wrong_version = doc;
  wrong_version["version"] = 99;
  EXPECT_EQ(code_of([&] { load_snapshot(wrong_version); }), ErrorCode::ParseFailure);
  auto missing = doc;
  missing.erase("status");
  EXPECT_EQ(code_of([&] { load_snapshot(missing); }), ErrorCode::ParseFailure);
  auto inconsistent = doc;
  inconsistent["round"] = 5;
  EXPECT_EQ(code_of([&] { load_snapshot(inconsistent); }), ErrorCode::ParseFailure);
  EXPECT_EQ(code_of([&] { load_snapshot(nlohmann::json::array()); }), ErrorCode::ParseFailure);

  testkit::TempDir dir;
  std::ofstream(dir / "bad.json") << "{not json";
  EXPECT_EQ(code_of([&] { load_snapshot_file(dir / "bad.json"); }), ErrorCode::ParseFailure);
  EXPECT_EQ(code_of([&] { load_snapshot_file(dir / "missing.json"); }), ErrorCode::Io);
}

TEST(SessionEnums, NamesRoundTrip) {
  for (auto s : {SessionStatus::AwaitingAnswer, SessionStatus::StoppedEarly, SessionStatus::Exhausted,
                 SessionStatus::Completed}) {
    EXPECT_EQ(status_from_string(to_string(s)), s);
  }
  EXPECT_EQ(answer_mode_from_string(to_string(AnswerMode::Simulated)), AnswerMode::Simulated);
  EXPECT_EQ(code_of([] { status_from_string("bogus"); }), ErrorCode::InvalidArgument);
}
