#include <algorithm>

#include "umivr/kernels.hpp"

namespace umivr::kernels::serial {

std::vector<double> cosine_scan(const MatrixView& rows, std::span<const double> query) {
  std::vector<double> out(rows.rows);
  for (std::size_t r = 0; r < rows.rows; ++r) {
    const float* row = rows.data.data() + r * rows.dim;
    double dot = 0.0;
    for (std::size_t d = 0; d < rows.dim; ++d) dot += static_cast<double>(row[d]) * query[d];
    out[r] = dot;
  }
  return out;
}

std::vector<Scored> top_k(std::span<const double> scores, std::span<const std::string> ids,
                          std::size_t k) {
  std::vector<Scored> all(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) all[i] = {i, scores[i]};
  k = std::min(k, all.size());
  auto before = [&](const Scored& a, const Scored& b) {
    return ranks_before(a.score, ids[a.row], b.score, ids[b.row]);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), before);
  all.resize(k);
  return all;
}

std::size_t count_ahead(std::span<const double> scores, std::span<const std::string> ids,
                        std::size_t row) {
  std::size_t ahead = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i != row && ranks_before(scores[i], ids[i], scores[row], ids[row])) ++ahead;
  }
  return ahead;
}

double laplacian_variance(const PlaneView& plane) {
  const std::size_t w = plane.width;
  const std::size_t h = plane.height;
  const auto px = [&](std::size_t x, std::size_t y) {
    return static_cast<double>(plane.pixels[y * w + x]);
  };
  // Two passes: mean, then centred sum of squares.
  double sum = 0.0;
  for (std::size_t y = 1; y + 1 < h; ++y) {
    for (std::size_t x = 1; x + 1 < w; ++x) {
      sum += px(x, y - 1) + px(x - 1, y) + px(x + 1, y) + px(x, y + 1) - 4.0 * px(x, y);
    }
  }
  const double n = static_cast<double>((w - 2) * (h - 2));
  const double mean = sum / n;
  double ss = 0.0;
  for (std::size_t y = 1; y + 1 < h; ++y) {
    for (std::size_t x = 1; x + 1 < w; ++x) {
      const double r =
          px(x, y - 1) + px(x - 1, y) + px(x + 1, y) + px(x, y + 1) - 4.0 * px(x, y) - mean;
      ss += r * r;
    }
  }
  return ss / n;
}

std::vector<double> laplacian_variances(std::span<const PlaneView> planes) {
  std::vector<double> out(planes.size());
  for (std::size_t i = 0; i < planes.size(); ++i) out[i] = laplacian_variance(planes[i]);
  return out;
}

}  // namespace umivr::kernels::serial
