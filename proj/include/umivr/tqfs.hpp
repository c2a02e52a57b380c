#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "umivr/embedding.hpp"
#include "umivr/kernels.hpp"

namespace umivr {

// 8-bit grayscale frame, row-major.
struct Frame {
  double timestamp = 0.0;  // seconds
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  kernels::PlaneView view() const { return {pixels, width, height}; }
  friend bool operator==(const Frame&, const Frame&) = default;
};

struct Video {
  std::vector<Frame> frames;  // strictly increasing timestamps
  double fps = 0.0;           // source frame rate
};

struct FrameSelection {
  std::vector<std::size_t> indices;  // into Video::frames
  std::vector<double> timestamps;
  std::vector<double> quality;  // Laplacian variance of each selected frame

  friend bool operator==(const FrameSelection&, const FrameSelection&) = default;
};

using FrameEmbedder = std::function<Embedding(const Frame&)>;

// No-reference sharpness: variance of the 4-neighbour Laplacian over interior
// pixels. Throws FrameTooSmall below 3x3.
double laplacian_variance(const Frame& frame);

// Scores every frame in parallel.
std::vector<double> score_frames(std::span<const Frame> frames);

// Indices of a `frame_count`-frame stream at `fps` resampled to `r_prime`:
// sample times j / r_prime from t = 0, nearest source frame, count
// max(1, floor(frame_count * r_prime / fps)).
std::vector<std::size_t> subsample(std::size_t frame_count, double fps, double r_prime);

// Splits [t_first, t_last] into `bins` equal-width bins (last bin closed) and
// returns, per non-empty bin in time order, the position of the
// highest-quality frame (ties: earliest).
std::vector<std::size_t> bin_select(std::span<const double> timestamps,
                                    std::span<const double> qualities, std::size_t bins);

// Lloyd's algorithm with k-means++ seeding; at most 100 iterations, stops once
// the summed centroid movement is below 1e-6. Deterministic for a given seed.
std::vector<std::size_t> kmeans(std::span<const Embedding> points, std::size_t k,
                                std::uint64_t seed);

struct TqfsOptions {
  double r_prime = 2.0;
  std::size_t bins = 16;
  std::size_t k = 8;
  std::uint64_t seed = 0;
};

// subsample -> score -> per-bin argmax -> embed -> k-means -> per-cluster
// argmax -> chronological order. With at most k bin candidates every candidate
// is returned.
FrameSelection select_frames(const Video& video, const TqfsOptions& options,
                             const FrameEmbedder& embed);

// Model-free frame embedding: 8x8 mean-pooled thumbnail, mean-centred, plus a
// small constant component so flat frames still normalize.
Embedding thumbnail_embedding(const Frame& frame);

}  // namespace umivr
