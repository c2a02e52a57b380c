#include "umivr/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "umivr/error.hpp"
#include "umivr/text.hpp"

namespace umivr {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

void check_distribution(std::span<const double> p, const char* name) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) {
      throw Error(ErrorCode::NotADistribution, std::string(name) + " has a negative or NaN entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::NotADistribution,
                std::string(name) + " sums to " + std::to_string(sum) + ", not 1");
  }
}

}  // namespace

ClusterAssignment cluster_neighborhood(std::span<const Embedding> caption_embeddings,
                                       std::span<const double> similarities, double tau) {
  const std::size_t n = caption_embeddings.size();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "no captions to cluster");
  if (similarities.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "one similarity per caption is required");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "tau must lie in (0, 1)");
  }

  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (cosine(caption_embeddings[i], caption_embeddings[j]) >= tau) sets.unite(i, j);
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return similarities[a] > similarities[b];
  });

  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> label_of_root(n, kUnset);
  ClusterAssignment out;
  out.labels.assign(n, 0);
  for (std::size_t i : order) {
    const auto root = sets.find(i);
    if (label_of_root[root] == kUnset) {
      label_of_root[root] = out.cluster_count++;
      out.cluster_similarity_mass.push_back(0.0);
    }
    out.labels[i] = label_of_root[root];
    out.cluster_similarity_mass[out.labels[i]] += std::max(similarities[i], 0.0);
  }
  return out;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

SemanticEntropy semantic_entropy(std::span<const Embedding> caption_embeddings,
                                 std::span<const double> similarities, double tau) {
  const auto clusters = cluster_neighborhood(caption_embeddings, similarities, tau);
  SemanticEntropy out;
  out.cluster_count = clusters.cluster_count;
  const double total = std::accumulate(clusters.cluster_similarity_mass.begin(),
                                       clusters.cluster_similarity_mass.end(), 0.0);
  if (total <= 0.0) {
    out.degenerate = true;
    out.se = std::log(static_cast<double>(caption_embeddings.size()));
    out.probs.assign(clusters.cluster_count, 1.0 / static_cast<double>(clusters.cluster_count));
    return out;
  }
  out.probs.reserve(clusters.cluster_count);
  for (double m : clusters.cluster_similarity_mass) out.probs.push_back(m / total);
  out.se = entropy(out.probs);
  return out;
}

double complexity_factor(std::string_view query, const TasOptions& options) {
  if (!options.complexity_adjustment) return 1.0;
  const double w = static_cast<double>(text::word_count(query));
  const double t0 = options.reference_length;
  return 1.0 / (1.0 + options.gamma * std::max(0.0, w - t0) / t0);
}

double tas(double se, std::size_t neighborhood_size, std::string_view query,
           const TasOptions& options) {
  if (neighborhood_size <= 1) return 0.0;
  const double normalized = se / std::log(static_cast<double>(neighborhood_size));
  return std::clamp(normalized * complexity_factor(query, options), 0.0, 1.0);
}

MappingDistribution mapping_distribution(std::span<const double> scores) {
  if (scores.size() < 2) {
    throw Error(ErrorCode::TooFewScores, "mapping distribution needs at least two scores");
  }
  const double mean =
      std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  MappingDistribution out;
  out.probs.resize(scores.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double excess = std::max(scores[i] - mean, 0.0);
    out.probs[i] = excess * excess;
    denom += out.probs[i];
  }
  if (denom == 0.0) {
    out.fallback_used = true;
    std::fill(out.probs.begin(), out.probs.end(), 1.0 / static_cast<double>(scores.size()));
    return out;
  }
  for (double& p : out.probs) p /= denom;
  return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorCode::LengthMismatch, "KL of unequal lengths");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::LengthMismatch, "JS divergence of distributions with unequal lengths");
  }
  check_distribution(p, "p");
  check_distribution(q, "q");
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return 0.5 * kl_divergence(p, m) + 0.5 * kl_divergence(q, m);
}

double mus(std::span<const double> scores) {
  const auto p = mapping_distribution(scores);
  std::vector<double> one_hot(p.probs.size(), 0.0);
  one_hot[0] = 1.0;
  return std::clamp(js_divergence(p.probs, one_hot) / std::numbers::ln2, 0.0, 1.0);
}

std::string_view to_string(Level level) noexcept {
  switch (level) {
    case Level::OpenEnded: return "open_ended";
    case Level::Distinguishing: return "distinguishing";
    case Level::Enrichment: return "enrichment";
  }
  return "enrichment";
}

Level level_from_string(std::string_view name) {
  if (name == "open_ended") return Level::OpenEnded;
  if (name == "distinguishing") return Level::Distinguishing;
  if (name == "enrichment") return Level::Enrichment;
  throw Error(ErrorCode::InvalidArgument, "unknown level " + std::string(name));
}

Level classify_level(double tas_score, double mus_score, double alpha, double beta) {
  if (tas_score > alpha) return Level::OpenEnded;
  if (mus_score > beta) return Level::Distinguishing;
  return Level::Enrichment;
}

void to_json(nlohmann::json& j, const UncertaintyReport& r) {
  j = nlohmann::json{{"tas", r.tas},
                     {"mus", r.mus},
                     {"se_raw", r.se_raw},
                     {"level", to_string(r.level)},
                     {"round", r.round}};
}

void from_json(const nlohmann::json& j, UncertaintyReport& r) {
  j.at("tas").get_to(r.tas);
  j.at("mus").get_to(r.mus);
  j.at("se_raw").get_to(r.se_raw);
  r.level = level_from_string(j.at("level").get<std::string>());
  j.at("round").get_to(r.round);
}

UncertaintyReport assess(const VectorIndex& index, const Embedding& query,
                         std::string_view query_text, const UncertaintyConfig& config,
                         std::size_t round) {
  if (config.k_tas == 0 || config.k_mus == 0) {
    throw Error(ErrorCode::InvalidArgument, "k_tas and k_mus must be positive");
  }
  const auto ranked = index.top_k(query, std::max(config.k_tas, config.k_mus));

  UncertaintyReport report;
  report.round = round;

  const std::size_t k_tas = std::min(config.k_tas, ranked.size());
  std::vector<Embedding> captions;
  std::vector<double> sims;
  captions.reserve(k_tas);
  sims.reserve(k_tas);
  for (std::size_t i = 0; i < k_tas; ++i) {
    captions.push_back(index.embedding(*index.find(ranked[i].id)));
    sims.push_back(ranked[i].score);
  }
  const auto se = semantic_entropy(captions, sims, config.tau);
  report.se_raw = se.se;
  report.tas = se.degenerate ? 1.0 : tas(se.se, k_tas, query_text, config.tas_options);

  const std::size_t k_mus = std::min(config.k_mus, ranked.size());
  if (k_mus >= 2) {
    std::vector<double> top(k_mus);
    for (std::size_t i = 0; i < k_mus; ++i) top[i] = ranked[i].score;
    report.mus = mus(top);
  } else {
    report.mus = 0.0;
  }
  report.level = classify_level(report.tas, report.mus, config.alpha, config.beta);
  return report;
}

}  // namespace umivr
