#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "umivr/embedding.hpp"
#include "umivr/tqfs.hpp"

namespace umivr::testkit {

using Rng = std::mt19937_64;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "umivr");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::vector<double> random_vector(Rng& rng, std::size_t dim);
Embedding random_unit(Rng& rng, std::size_t dim);
// Unit vector at `center` plus Gaussian noise of scale `spread`.
Embedding jitter(Rng& rng, const Embedding& center, double spread);
std::vector<double> random_distribution(Rng& rng, std::size_t k, double zero_probability = 0.2);
Embedding basis(std::size_t dim, std::size_t axis);

// 1-pixel checkerboard alternating 0 and 255.
Frame checkerboard(std::size_t width, std::size_t height, double timestamp = 0.0);
// 3x3 box blur, edges clamped, rounded to the nearest integer.
Frame box_blur(const Frame& frame);

struct PlantedVideo {
  Video video;
  std::vector<double> planted;  // timestamps of the sharp frames
};

// 8 scenes x 4 frames at 2 fps, 32x32. Each scene has a bright vertical band
// at its own column range; one frame per scene carries checkerboard texture,
// the other three are its blurred copy.
PlantedVideo planted_video();

// Up to 24 frames, up to 32x32, uniform random pixels with random blur.
Video random_video(Rng& rng);
TqfsOptions random_tqfs_options(Rng& rng, const Video& video);

}  // namespace umivr::testkit
