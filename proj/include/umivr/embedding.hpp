#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace umivr {

inline constexpr std::size_t kDefaultDim = 768;

// Unit-norm dense vector. Construct through normalize(); the raw-value
// constructor is for values that are already unit-norm (e.g. widened index
// rows) and does not renormalize.
class Embedding {
 public:
  Embedding() = default;
  static Embedding from_unit(std::vector<double> values) { return Embedding(std::move(values)); }

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const noexcept;

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  explicit Embedding(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

// Throws ZeroVector when every component is below 1e-12 in magnitude.
Embedding normalize(std::span<const double> raw);
Embedding normalize(std::span<const float> raw);
// Also checks the dimension against the index's declared D.
Embedding normalize(std::span<const double> raw, std::size_t expected_dim);

// Dot product of two unit vectors, clamped to [-1, 1].
double cosine(const Embedding& a, const Embedding& b);

}  // namespace umivr
