#include "umivr/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "umivr/error.hpp"

namespace umivr {

namespace {

constexpr double kZeroTolerance = 1e-12;

template <typename T>
Embedding normalize_impl(std::span<const T> raw) {
  if (raw.empty()) throw Error(ErrorCode::ZeroVector, "cannot normalize an empty vector");
  bool all_zero = true;
  double sum_sq = 0.0;
  for (T v : raw) {
    const double d = static_cast<double>(v);
    if (!std::isfinite(d)) throw Error(ErrorCode::InvalidArgument, "vector has a non-finite component");
    if (std::abs(d) >= kZeroTolerance) all_zero = false;
    sum_sq += d * d;
  }
  if (all_zero) throw Error(ErrorCode::ZeroVector, "cannot normalize an all-zero vector");
  const double inv = 1.0 / std::sqrt(sum_sq);
  std::vector<double> out(raw.size());
  std::transform(raw.begin(), raw.end(), out.begin(),
                 [inv](T v) { return static_cast<double>(v) * inv; });
  return Embedding::from_unit(std::move(out));
}

}  // namespace

double Embedding::norm() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

Embedding normalize(std::span<const double> raw) { return normalize_impl(raw); }
Embedding normalize(std::span<const float> raw) { return normalize_impl(raw); }

Embedding normalize(std::span<const double> raw, std::size_t expected_dim) {
  if (raw.size() != expected_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected dimension " + std::to_string(expected_dim) + ", got " +
                    std::to_string(raw.size()));
  }
  return normalize_impl(raw);
}

double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cosine of " + std::to_string(a.dim()) + "-d and " + std::to_string(b.dim()) +
                    "-d vectors");
  }
  double dot = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) dot += av[i] * bv[i];
  return std::clamp(dot, -1.0, 1.0);
}

}  // namespace umivr
