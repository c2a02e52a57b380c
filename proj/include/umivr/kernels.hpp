#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// `kernels::serial` and an OpenMP version in `kernels::omp` with identical
// results: per-element outputs are written to fixed slots and every
// reduction is order-independent, so the two must agree bit-for-bit.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace umivr::kernels {

// Row-major view of a count x dim f32 matrix.
struct MatrixView {
  std::span<const float> data;
  std::size_t rows = 0;
  std::size_t dim = 0;
};

// Grayscale 8-bit plane, row-major.
struct PlaneView {
  std::span<const std::uint8_t> pixels;
  std::size_t width = 0;
  std::size_t height = 0;
};

struct Scored {
  std::size_t row;
  double score;
};

// Total order used for every ranking: score descending, then id ascending.
inline bool ranks_before(double score_a, const std::string& id_a, double score_b,
                         const std::string& id_b) {
  if (score_a != score_b) return score_a > score_b;
  return id_a < id_b;
}

namespace serial {

// Dot product of every row with the query, accumulated in double.
std::vector<double> cosine_scan(const MatrixView& rows, std::span<const double> query);

// The k best rows under ranks_before(scores, ids); sorted.
std::vector<Scored> top_k(std::span<const double> scores, std::span<const std::string> ids,
                          std::size_t k);

// Number of rows that rank strictly ahead of `row`.
std::size_t count_ahead(std::span<const double> scores, std::span<const std::string> ids,
                        std::size_t row);

// Population variance of the 4-neighbour Laplacian over interior pixels.
double laplacian_variance(const PlaneView& plane);

std::vector<double> laplacian_variances(std::span<const PlaneView> planes);

}  // namespace serial

namespace omp {

std::vector<double> cosine_scan(const MatrixView& rows, std::span<const double> query);
std::vector<Scored> top_k(std::span<const double> scores, std::span<const std::string> ids,
                          std::size_t k);
std::size_t count_ahead(std::span<const double> scores, std::span<const std::string> ids,
                        std::size_t row);
std::vector<double> laplacian_variances(std::span<const PlaneView> planes);

}  // namespace omp

}  // namespace umivr::kernels
