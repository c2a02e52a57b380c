#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "umivr/embedding.hpp"
#include "umivr/index.hpp"

namespace umivr {

// ---------------------------------------------------------------------------
// Text ambiguity: semantic entropy over the query's caption neighbourhood.
// ---------------------------------------------------------------------------

struct ClusterAssignment {
  std::vector<std::size_t> labels;  // one per caption, in input order
  std::size_t cluster_count = 0;
  // Per-cluster sum of similarities, negatives clamped to zero.
  std::vector<double> cluster_similarity_mass;
};

// Single-linkage clustering over the graph with an edge wherever the caption
// cosine is >= tau. Cluster labels are numbered in order of first appearance
// when captions are visited by descending similarity (ties: lower index).
ClusterAssignment cluster_neighborhood(std::span<const Embedding> caption_embeddings,
                                       std::span<const double> similarities, double tau);

struct SemanticEntropy {
  double se = 0.0;  // nats
  std::size_t cluster_count = 0;
  std::vector<double> probs;  // p(c_j | x), sums to 1
  // All clamped similarities were zero: se is log K and probs is uniform.
  bool degenerate = false;
};

SemanticEntropy semantic_entropy(std::span<const Embedding> caption_embeddings,
                                 std::span<const double> similarities, double tau);

// Shannon entropy in nats with 0 log 0 = 0.
double entropy(std::span<const double> probs);

struct TasOptions {
  bool complexity_adjustment = true;
  double gamma = 0.5;
  double reference_length = 8.0;  // words

  friend bool operator==(const TasOptions&, const TasOptions&) = default;
};

// 1 / (1 + gamma * max(0, w - t0) / t0), w = whitespace word count; 1 when
// the adjustment is disabled.
double complexity_factor(std::string_view query, const TasOptions& options = {});

// clamp((se / log K) * complexity_factor(query), 0, 1); K = 1 gives 0.
double tas(double se, std::size_t neighborhood_size, std::string_view query,
           const TasOptions& options = {});

// ---------------------------------------------------------------------------
// Mapping uncertainty: JS divergence of the sharpened top-k score
// distribution from the one-hot ideal.
// ---------------------------------------------------------------------------

struct MappingDistribution {
  std::vector<double> probs;
  bool fallback_used = false;  // no score exceeded the mean; probs is uniform
};

// p_i = max(s_i - mean, 0)^2 / sum_j max(s_j - mean, 0)^2. Throws
// TooFewScores for fewer than two scores.
MappingDistribution mapping_distribution(std::span<const double> scores);

// KL(p || q) in nats with 0 log(0 / x) = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Throws LengthMismatch / NotADistribution (sum off by more than 1e-9 or a
// negative entry).
double js_divergence(std::span<const double> p, std::span<const double> q);

// JSD(p || one-hot at the first position) / log 2, in [0, 1].
double mus(std::span<const double> scores);

// ---------------------------------------------------------------------------
// Routing
// ---------------------------------------------------------------------------

enum class Level {
  OpenEnded = 0,       // Level-0: high text ambiguity
  Distinguishing = 1,  // Level-1: high mapping uncertainty
  Enrichment = 2,      // Level-2: both low
};

std::string_view to_string(Level level) noexcept;
Level level_from_string(std::string_view name);

// Strict inequalities: tas == alpha is not Level-0, mus == beta is not Level-1.
Level classify_level(double tas, double mus, double alpha, double beta);

struct UncertaintyReport {
  double tas = 0.0;
  double mus = 0.0;
  double se_raw = 0.0;
  Level level = Level::Enrichment;
  std::size_t round = 0;

  friend bool operator==(const UncertaintyReport&, const UncertaintyReport&) = default;
};

void to_json(nlohmann::json& j, const UncertaintyReport& r);
void from_json(const nlohmann::json& j, UncertaintyReport& r);

struct UncertaintyConfig {
  std::size_t k_tas = 20;  // caption neighbours for semantic entropy
  std::size_t k_mus = 10;  // top-k window for the mapping distribution
  double tau = 0.85;       // caption clustering threshold
  TasOptions tas_options;
  double alpha = 0.5;
  double beta = 0.2;

  friend bool operator==(const UncertaintyConfig&, const UncertaintyConfig&) = default;
};

// Scores a query against the index. The TAS neighbourhood
// is the top-k_tas captions; MUS uses the top-k_mus similarities. With a single
// indexed video the mapping is certain (MUS = 0).
UncertaintyReport assess(const VectorIndex& index, const Embedding& query,
                         std::string_view query_text, const UncertaintyConfig& config,
                         std::size_t round);

}  // namespace umivr
