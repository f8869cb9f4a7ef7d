#pragma once

#include <string>

#include "rfdvc/types.hpp"

namespace rfdvc {

// Binary PPM (P6), maxval 255. Roles/poses are not carried by the format.
void write_ppm(const std::string& path, const Frame& f);

// Reads a binary PPM. Frame dimensions must be multiples of 16; with
// pad_to_16 the raster is padded up by edge replication instead of
// rejected (used by the CLI for external input).
Frame read_ppm(const std::string& path, bool pad_to_16 = false);

// Binary PGM (P5): set bits are written as the mask label (clamped to 255),
// background as 0. Any nonzero gray reads back as a set bit.
void write_pgm(const std::string& path, const Mask& m);
Mask read_pgm(const std::string& path, uint32_t label = 1);

}  // namespace rfdvc
