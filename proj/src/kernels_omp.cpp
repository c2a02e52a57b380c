#include <omp.h>

#include <algorithm>

#include "umivr/kernels.hpp"

namespace umivr::kernels::omp {

std::vector<double> cosine_scan(const MatrixView& rows, std::span<const double> query) {
  std::vector<double> out(rows.rows);
  const auto n = static_cast<std::ptrdiff_t>(rows.rows);
  const float* base = rows.data.data();
  const std::size_t dim = rows.dim;
  const double* q = query.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const float* row = base + static_cast<std::size_t>(r) * dim;
    double dot = 0.0;
    for (std::size_t d = 0; d < dim; ++d) dot += static_cast<double>(row[d]) * q[d];
    out[static_cast<std::size_t>(r)] = dot;
  }
  return out;
}

std::vector<Scored> top_k(std::span<const double> scores, std::span<const std::string> ids,
                          std::size_t k) {
  const std::size_t n = scores.size();
  k = std::min(k, n);
  if (k == 0) return {};
  auto before = [&](const Scored& a, const Scored& b) {
    return ranks_before(a.score, ids[a.row], b.score, ids[b.row]);
  };

  // Each thread keeps the k best of its static chunk; the merged candidate
  // set contains the global k best, and the total order makes the final
  // sort independent of how the chunks were split.
  std::vector<std::vector<Scored>> partial(static_cast<std::size_t>(omp_get_max_threads()));
#pragma omp parallel
  {
    auto& local = partial[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      local.push_back({static_cast<std::size_t>(i), scores[static_cast<std::size_t>(i)]});
    }
    const auto keep = std::min(k, local.size());
    std::partial_sort(local.begin(), local.begin() + static_cast<std::ptrdiff_t>(keep),
                      local.end(), before);
    local.resize(keep);
  }

  std::vector<Scored> merged;
  for (auto& p : partial) merged.insert(merged.end(), p.begin(), p.end());
  std::partial_sort(merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(k),
                    merged.end(), before);
  merged.resize(k);
  return merged;
}

std::size_t count_ahead(std::span<const double> scores, std::span<const std::string> ids,
                        std::size_t row) {
  std::size_t ahead = 0;
  const auto n = static_cast<std::ptrdiff_t>(scores.size());
#pragma omp parallel for reduction(+ : ahead) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (u != row && ranks_before(scores[u], ids[u], scores[row], ids[row])) ++ahead;
  }
  return ahead;
}

std::vector<double> laplacian_variances(std::span<const PlaneView> planes) {
  std::vector<double> out(planes.size());
  const auto n = static_cast<std::ptrdiff_t>(planes.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        serial::laplacian_variance(planes[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace umivr::kernels::omp
