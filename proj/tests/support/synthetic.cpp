#include "synthetic.hpp"

#include <cstdio>
#include <string>

namespace umivr::testkit {

namespace {

std::string id_of(int v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "v%02d", v);
  return buf;
}

std::string group_token(int g, int j) { return "g" + std::to_string(g) + "t" + std::to_string(j); }
std::string unique_token(int v, char s) { return "u" + std::to_string(v) + s; }

}  // namespace

SyntheticCorpus make_synthetic_corpus() {
  constexpr int kGroups = 5;
  constexpr int kPerGroup = 4;
  constexpr int kGroupTokens = 20;

  SyntheticCorpus c;
  c.mock_table = nlohmann::json::object();
  for (int v = 0; v < kGroups * kPerGroup; ++v) {
    const int g = v / kPerGroup;
    std::string caption = "person";
    for (int j = 0; j < kGroupTokens; ++j) caption += " " + group_token(g, j);
    caption += " " + unique_token(v, 'a') + " " + unique_token(v, 'b');

    VideoRecord r;
    r.id = id_of(v);
    r.caption = caption;
    r.objects = {"person", group_token(g, 0)};
    r.scene_keywords = {group_token(g, 1)};
    c.records.push_back(r);

    const auto key = "sim_answer|" + r.id;
    c.mock_table[key + "|r1"] = "the person is next to " + group_token(g, 0);
    c.mock_table[key + "|r2"] = "there is also " + unique_token(v, 'a') + " nearby";
    c.mock_table[key + "|r3"] = "and then " + unique_token(v, 'b') + " shows up";
    c.mock_table[key + "|*"] = unique_token(v, 'a') + " and " + unique_token(v, 'b');
  }
  for (int q = 0; q < 10; ++q) {
    const int v = 2 * q;
    c.queries.push_back({"q" + std::to_string(q), "a person", id_of(v)});
  }
  return c;
}

}  // namespace umivr::testkit
