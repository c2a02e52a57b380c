#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace umivr::testkit {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::vector<double> random_vector(Rng& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

Embedding random_unit(Rng& rng, std::size_t dim) {
  return normalize(std::span<const double>(random_vector(rng, dim)));
}

Embedding jitter(Rng& rng, const Embedding& center, double spread) {
  std::normal_distribution<double> n(0.0, spread);
  std::vector<double> v(center.values().begin(), center.values().end());
  for (auto& x : v) x += n(rng);
  return normalize(std::span<const double>(v));
}

std::vector<double> random_distribution(Rng& rng, std::size_t k, double zero_probability) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(k);
  double sum = 0.0;
  for (auto& x : p) {
    x = u(rng) < zero_probability ? 0.0 : u(rng);
    sum += x;
  }
  if (sum == 0.0) {
    p[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)] = 1.0;
    return p;
  }
  for (auto& x : p) x /= sum;
  return p;
}

Embedding basis(std::size_t dim, std::size_t axis) {
  std::vector<double> v(dim, 0.0);
  v[axis] = 1.0;
  return Embedding::from_unit(std::move(v));
}

Frame checkerboard(std::size_t width, std::size_t height, double timestamp) {
  Frame f{timestamp, width, height, std::vector<std::uint8_t>(width * height)};
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) f.pixels[y * width + x] = (x + y) % 2 ? 255 : 0;
  }
  return f;
}

Frame box_blur(const Frame& in) {
  Frame out = in;
  const auto w = static_cast<long>(in.width);
  const auto h = static_cast<long>(in.height);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      int sum = 0;
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dx = -1; dx <= 1; ++dx) {
          const long yy = std::clamp(y + dy, 0L, h - 1);
          const long xx = std::clamp(x + dx, 0L, w - 1);
          sum += in.pixels[static_cast<std::size_t>(yy * w + xx)];
        }
      }
      out.pixels[static_cast<std::size_t>(y * w + x)] = static_cast<std::uint8_t>((sum + 4) / 9);
    }
  }
  return out;
}

PlantedVideo planted_video() {
  constexpr std::size_t kScenes = 8;
  constexpr std::size_t kPerScene = 4;
  constexpr std::size_t kSide = 32;
  constexpr double kFps = 2.0;

  PlantedVideo pv;
  pv.video.fps = kFps;
  for (std::size_t s = 0; s < kScenes; ++s) {
    Frame sharp{0.0, kSide, kSide, std::vector<std::uint8_t>(kSide * kSide)};
    for (std::size_t y = 0; y < kSide; ++y) {
      for (std::size_t x = 0; x < kSide; ++x) {
        const bool band = x / 4 == s;
        const int base = band ? 200 : 60;
        const int texture = (x + y) % 2 ? 40 : -40;
        sharp.pixels[y * kSide + x] = static_cast<std::uint8_t>(base + texture);
      }
    }
    const Frame blurred = box_blur(sharp);
    // Sharp frame sits at position 1 or 2 so no two sharp frames are adjacent.
    const std::size_t planted_pos = 1 + s % 2;
    for (std::size_t p = 0; p < kPerScene; ++p) {
      Frame f = p == planted_pos ? sharp : blurred;
      f.timestamp = static_cast<double>(s * kPerScene + p) / kFps;
      if (p == planted_pos) pv.planted.push_back(f.timestamp);
      pv.video.frames.push_back(std::move(f));
    }
  }
  return pv;
}

Video random_video(Rng& rng) {
  std::uniform_int_distribution<std::size_t> count(1, 24);
  std::uniform_int_distribution<std::size_t> side(3, 32);
  std::uniform_int_distribution<int> pixel(0, 255);
  std::uniform_int_distribution<int> blur_passes(0, 2);
  const double rates[] = {1.0, 2.0, 4.0, 8.0, 24.0, 30.0};
  Video v;
  v.fps = rates[std::uniform_int_distribution<std::size_t>(0, 5)(rng)];
  const auto n = count(rng);
  const auto w = side(rng);
  const auto h = side(rng);
  for (std::size_t i = 0; i < n; ++i) {
    Frame f{static_cast<double>(i) / v.fps, w, h, std::vector<std::uint8_t>(w * h)};
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(pixel(rng));
    for (int b = blur_passes(rng); b > 0; --b) f = box_blur(f);
    v.frames.push_back(std::move(f));
  }
  return v;
}

TqfsOptions random_tqfs_options(Rng& rng, const Video& video) {
  std::vector<double> rates;
  for (double r : {0.5, 1.0, 2.0, 4.0}) {
    if (r <= video.fps) rates.push_back(r);
  }
  rates.push_back(video.fps);
  TqfsOptions o;
  o.r_prime = rates[std::uniform_int_distribution<std::size_t>(0, rates.size() - 1)(rng)];
  o.bins = std::uniform_int_distribution<std::size_t>(1, 16)(rng);
  o.k = std::uniform_int_distribution<std::size_t>(1, o.bins)(rng);
  o.seed = rng();
  return o;
}

}  // namespace umivr::testkit
