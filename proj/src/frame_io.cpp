#include "umivr/frame_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "umivr/error.hpp"

namespace umivr {

namespace {

std::string next_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) return tok;
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  return tok;
}

template <typename T>
bool read_le(std::istream& in, T& value) {
  std::array<unsigned char, sizeof(T)> buf{};
  in.read(reinterpret_cast<char*>(buf.data()), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) return false;
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(buf[i]) << (8 * i));
  value = v;
  return true;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.put(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

}  // namespace

Frame read_pgm(const std::filesystem::path& path, double timestamp) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  if (next_token(in) != "P5") throw Error(ErrorCode::Io, path.string() + " is not a binary PGM");
  Frame f;
  f.timestamp = timestamp;
  try {
    f.width = std::stoul(next_token(in));
    f.height = std::stoul(next_token(in));
    const auto maxval = std::stoul(next_token(in));
    if (maxval == 0 || maxval > 255) throw Error(ErrorCode::Io, "unsupported PGM maxval");
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::Io, "malformed PGM header in " + path.string());
  }
  f.pixels.resize(f.width * f.height);
  in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(f.pixels.size())) {
    throw Error(ErrorCode::Io, path.string() + " is truncated");
  }
  return f;
}

void write_pgm(const std::filesystem::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

std::vector<Frame> read_pgm_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::Io, dir.string() + " is not a directory");
  }
  std::vector<std::pair<long long, std::filesystem::path>> found;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
    const auto stem = entry.path().stem().string();
    if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](unsigned char c) {
          return std::isdigit(c);
        })) {
      continue;
    }
    found.emplace_back(std::stoll(stem), entry.path());
  }
  std::sort(found.begin(), found.end());
  std::vector<Frame> frames;
  frames.reserve(found.size());
  for (const auto& [millis, path] : found) {
    frames.push_back(read_pgm(path, static_cast<double>(millis) / 1000.0));
  }
  return frames;
}

std::vector<Frame> read_frame_stream(std::istream& in) {
  std::vector<Frame> frames;
  while (true) {
    std::uint32_t w = 0;
    if (!read_le(in, w)) {
      if (in.gcount() == 0) break;
      throw Error(ErrorCode::Io, "truncated frame header");
    }
    std::uint32_t h = 0;
    std::uint64_t millis = 0;
    if (!read_le(in, h) || !read_le(in, millis)) throw Error(ErrorCode::Io, "truncated frame header");
    Frame f;
    f.width = w;
    f.height = h;
    f.timestamp = static_cast<double>(millis) / 1000.0;
    f.pixels.resize(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(f.pixels.size())) {
      throw Error(ErrorCode::Io, "truncated frame payload");
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

void write_frame_stream(std::ostream& out, const std::vector<Frame>& frames) {
  for (const auto& f : frames) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.width));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.height));
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(std::llround(f.timestamp * 1000.0)));
    out.write(reinterpret_cast<const char*>(f.pixels.data()),
              static_cast<std::streamsize>(f.pixels.size()));
  }
}

double estimate_fps(const std::vector<Frame>& frames) {
  if (frames.size() < 2) return 1.0;
  std::vector<double> gaps;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    gaps.push_back(frames[i].timestamp - frames[i - 1].timestamp);
  }
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2),
                   gaps.end());
  const double gap = gaps[gaps.size() / 2];
  if (!(gap > 0.0)) throw Error(ErrorCode::InvalidArgument, "frame timestamps are not increasing");
  return 1.0 / gap;
}

}  // namespace umivr
