#include "umivr/text_embedder.hpp"

#include <cmath>
#include <vector>

#include "http_client.hpp"
#include "umivr/error.hpp"
#include "umivr/text.hpp"

namespace umivr {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dim, std::size_t slots, std::uint64_t seed)
    : dim_(dim), slots_(slots), seed_(seed) {
  if (dim == 0 || slots == 0) {
    throw Error(ErrorCode::InvalidArgument, "hash embedder needs dim > 0 and slots > 0");
  }
}

Embedding HashEmbedder::embed(std::string_view input) const {
  const auto words = text::terms(input);
  if (words.empty()) throw Error(ErrorCode::EmptyQuery, "text has no terms");
  std::vector<double> acc(dim_, 0.0);
  const double weight = 1.0 / std::sqrt(static_cast<double>(slots_));
  for (const auto& w : words) {
    std::uint64_t state = text::fnv1a64(w) ^ seed_;
    for (std::size_t s = 0; s < slots_; ++s) {
      const std::uint64_t h = splitmix64(state);
      const auto slot = static_cast<std::size_t>((h >> 1) % dim_);
      acc[slot] += (h & 1u) ? weight : -weight;
    }
  }
  return normalize(std::span<const double>(acc));
}

HttpEmbedder::HttpEmbedder(Options options) : options_(std::move(options)) {}

Embedding HttpEmbedder::embed(std::string_view input) const {
  if (text::trim(input).empty()) throw Error(ErrorCode::EmptyQuery, "text is empty");
  const nlohmann::json body{{"model", options_.model}, {"input", std::string(input)}};
  const auto reply =
      detail::post_json(options_.base_url, "/embeddings", body, options_.api_key, options_.timeout);
  std::vector<double> values;
  try {
    values = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("unexpected embeddings reply: ") + e.what(), reply.dump());
  }
  return normalize(std::span<const double>(values), options_.dim);
}

}  // namespace umivr
