#include "umivr/tqfs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "umivr/error.hpp"

namespace umivr {

namespace {

void check_frame(const Frame& f) {
  if (f.width < 3 || f.height < 3) {
    throw Error(ErrorCode::FrameTooSmall, "frame is " + std::to_string(f.width) + "x" +
                                              std::to_string(f.height) + ", need at least 3x3");
  }
  if (f.pixels.size() != f.width * f.height) {
    throw Error(ErrorCode::InvalidArgument, "frame pixel count does not match its size");
  }
}

double unit_draw(std::uint64_t& state) {
  // splitmix64, top 53 bits
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

}  // namespace

double laplacian_variance(const Frame& frame) {
  check_frame(frame);
  return kernels::serial::laplacian_variance(frame.view());
}

std::vector<double> score_frames(std::span<const Frame> frames) {
  std::vector<kernels::PlaneView> planes;
  planes.reserve(frames.size());
  for (const auto& f : frames) {
    check_frame(f);
    planes.push_back(f.view());
  }
  return kernels::omp::laplacian_variances(planes);
}

std::vector<std::size_t> subsample(std::size_t frame_count, double fps, double r_prime) {
  if (frame_count == 0) throw Error(ErrorCode::EmptyVideo, "video has no frames");
  if (!(fps > 0.0) || !(r_prime > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "frame rates must be positive");
  }
  if (r_prime > fps) throw Error(ErrorCode::InvalidArgument, "target rate exceeds source rate");
  const double exact = static_cast<double>(frame_count) * r_prime / fps;
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(exact + 1e-9)));
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) / r_prime;
    const auto idx = static_cast<std::size_t>(std::llround(t * fps));
    out.push_back(std::min(idx, frame_count - 1));
  }
  return out;
}

std::vector<std::size_t> bin_select(std::span<const double> timestamps,
                                    std::span<const double> qualities, std::size_t bins) {
  if (bins == 0) throw Error(ErrorCode::InvalidArgument, "bin count must be positive");
  if (timestamps.empty()) throw Error(ErrorCode::EmptyVideo, "no frames to bin");
  if (timestamps.size() != qualities.size()) {
    throw Error(ErrorCode::LengthMismatch, "one quality score per frame is required");
  }
  const double first = timestamps.front();
  const double span = timestamps.back() - first;
  const double m = static_cast<double>(bins);
  const auto lower_edge = [&](std::size_t b) { return first + span * static_cast<double>(b) / m; };

  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> best(bins, kNone);
  for (std::size_t i = 0; i < timestamps.size(); ++i) {
    std::size_t b = 0;
    if (span > 0.0) {
      b = std::min(bins - 1, static_cast<std::size_t>((timestamps[i] - first) * m / span));
      // Snap to the edge definition lower_edge(b) <= t < lower_edge(b + 1).
      while (b > 0 && timestamps[i] < lower_edge(b)) --b;
      while (b + 1 < bins && timestamps[i] >= lower_edge(b + 1)) ++b;
    }
    if (best[b] == kNone || qualities[i] > qualities[best[b]]) best[b] = i;
  }
  std::vector<std::size_t> out;
  for (auto i : best) {
    if (i != kNone) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> kmeans(std::span<const Embedding> points, std::size_t k,
                                std::uint64_t seed) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (points.size() < k) {
    throw Error(ErrorCode::TooFewPoints, "k-means with k=" + std::to_string(k) + " on " +
                                             std::to_string(points.size()) + " points");
  }
  const std::size_t n = points.size();
  const std::size_t dim = points.front().dim();
  for (const auto& p : points) {
    if (p.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "mixed point dimensions");
  }

  // k-means++ seeding.
  std::uint64_t state = seed;
  std::vector<std::vector<double>> centers;
  std::vector<bool> chosen(n, false);
  auto take = [&](std::size_t i) {
    chosen[i] = true;
    centers.emplace_back(points[i].values().begin(), points[i].values().end());
  };
  take(std::min(n - 1, static_cast<std::size_t>(unit_draw(state) * static_cast<double>(n))));
  std::vector<double> d2(n);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, squared_distance(points[i].values(), c));
      d2[i] = chosen[i] ? 0.0 : best;
      total += d2[i];
    }
    if (total <= 0.0) {
      // Remaining points coincide with existing centres.
      const auto next = static_cast<std::size_t>(
          std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
      take(next);
      continue;
    }
    const double target = unit_draw(state) * total;
    double cumulative = 0.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      cumulative += d2[i];
      pick = i;
      if (cumulative > target) break;
    }
    take(pick);
  }

  // Lloyd iterations.
  std::vector<std::size_t> labels(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(points[i].values(), centers[c]);
        if (d < best) {
          best = d;
          labels[i] = c;
        }
      }
    }
    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> sum(dim, 0.0);
      std::size_t members = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != c) continue;
        ++members;
        const auto v = points[i].values();
        for (std::size_t d = 0; d < dim; ++d) sum[d] += v[d];
      }
      if (members == 0) continue;  // empty cluster keeps its centre
      for (double& s : sum) s /= static_cast<double>(members);
      movement += std::sqrt(squared_distance(sum, centers[c]));
      centers[c] = std::move(sum);
    }
    if (movement < 1e-6) break;
  }
  return labels;
}

FrameSelection select_frames(const Video& video, const TqfsOptions& options,
                             const FrameEmbedder& embed) {
  const auto& frames = video.frames;
  if (frames.empty()) throw Error(ErrorCode::EmptyVideo, "video has no frames");
  if (options.k == 0 || options.k > options.bins) {
    throw Error(ErrorCode::InvalidArgument, "need 1 <= k <= bins");
  }
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (!(frames[i].timestamp > frames[i - 1].timestamp)) {
      throw Error(ErrorCode::InvalidArgument, "frame timestamps must be strictly increasing");
    }
  }

  const auto sampled = subsample(frames.size(), video.fps, options.r_prime);
  // Nearest-index rounding can clamp onto the last frame twice; keep one.
  std::vector<std::size_t> source;
  for (auto idx : sampled) {
    if (source.empty() || source.back() != idx) source.push_back(idx);
  }
  std::vector<kernels::PlaneView> planes;
  std::vector<double> times;
  for (auto idx : source) {
    check_frame(frames[idx]);
    planes.push_back(frames[idx].view());
    times.push_back(frames[idx].timestamp);
  }
  const auto quality = kernels::omp::laplacian_variances(planes);
  const auto candidates = bin_select(times, quality, options.bins);

  std::vector<std::size_t> chosen;  // positions in `source`
  if (candidates.size() <= options.k) {
    chosen = candidates;
  } else {
    std::vector<Embedding> embedded;
    embedded.reserve(candidates.size());
    for (auto c : candidates) embedded.push_back(embed(frames[source[c]]));
    const auto labels = kmeans(embedded, options.k, options.seed);
    constexpr auto kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> best(options.k, kNone);
    // Candidates are in time order, so strict '>' keeps the earliest on ties.
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      auto& b = best[labels[i]];
      if (b == kNone || quality[candidates[i]] > quality[b]) b = candidates[i];
    }
    for (auto b : best) {
      if (b != kNone) chosen.push_back(b);
    }
    std::sort(chosen.begin(), chosen.end());
  }

  FrameSelection out;
  for (auto pos : chosen) {
    out.indices.push_back(source[pos]);
    out.timestamps.push_back(times[pos]);
    out.quality.push_back(quality[pos]);
  }
  return out;
}

Embedding thumbnail_embedding(const Frame& frame) {
  check_frame(frame);
  constexpr std::size_t kGrid = 8;
  std::vector<double> cells(kGrid * kGrid + 1, 0.0);
  std::vector<double> counts(kGrid * kGrid, 0.0);
  for (std::size_t y = 0; y < frame.height; ++y) {
    const std::size_t gy = y * kGrid / frame.height;
    for (std::size_t x = 0; x < frame.width; ++x) {
      const std::size_t gx = x * kGrid / frame.width;
      cells[gy * kGrid + gx] += frame.pixels[y * frame.width + x];
      counts[gy * kGrid + gx] += 1.0;
    }
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    cells[i] = counts[i] > 0.0 ? cells[i] / counts[i] / 255.0 : 0.0;
    mean += cells[i];
  }
  mean /= static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) cells[i] -= mean;
  cells.back() = 1e-3;
  return normalize(std::span<const double>(cells));
}

}  // namespace umivr
