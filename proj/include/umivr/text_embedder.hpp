#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "umivr/embedding.hpp"

namespace umivr {

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::size_t dim() const = 0;
  // Throws EmptyQuery when the text carries no terms.
  virtual Embedding embed(std::string_view text) const = 0;
};

// Signed feature hashing: each lowercase alphanumeric term adds +-1/sqrt(slots)
// at `slots` hashed coordinates. Distinct terms are nearly orthogonal, so
// cosine tracks term overlap. Deterministic for a given (dim, slots, seed).
class HashEmbedder final : public TextEmbedder {
 public:
  explicit HashEmbedder(std::size_t dim = kDefaultDim, std::size_t slots = 4,
                        std::uint64_t seed = 0);

  std::size_t dim() const override { return dim_; }
  Embedding embed(std::string_view text) const override;

 private:
  std::size_t dim_;
  std::size_t slots_;
  std::uint64_t seed_;
};

// OpenAI-compatible `POST {base_url}/embeddings`.
class HttpEmbedder final : public TextEmbedder {
 public:
  struct Options {
    std::string base_url;
    std::string model;
    std::string api_key;
    std::size_t dim = kDefaultDim;
    std::chrono::milliseconds timeout{60'000};
  };

  explicit HttpEmbedder(Options options);

  std::size_t dim() const override { return options_.dim; }
  Embedding embed(std::string_view text) const override;

 private:
  Options options_;
};

}  // namespace umivr
