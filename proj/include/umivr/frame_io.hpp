#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "umivr/tqfs.hpp"

namespace umivr {

// Reads every `<millis>.pgm` (binary P5, maxval <= 255) in `dir`, ordered by
// timestamp. Other files are ignored.
std::vector<Frame> read_pgm_dir(const std::filesystem::path& dir);

Frame read_pgm(const std::filesystem::path& path, double timestamp);
void write_pgm(const std::filesystem::path& path, const Frame& frame);

// Length-prefixed little-endian stream: u32 W, u32 H, u64 timestamp_millis,
// then W*H bytes; repeated until EOF. A partial record throws Io.
std::vector<Frame> read_frame_stream(std::istream& in);
void write_frame_stream(std::ostream& out, const std::vector<Frame>& frames);

// Source frame rate estimated from the median timestamp spacing; 1.0 for a
// single frame.
double estimate_fps(const std::vector<Frame>& frames);

}  // namespace umivr
