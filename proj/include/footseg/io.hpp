#pragma once

// Raster file formats: PNG (via libpng) and binary PGM for masks, labels and
// images, plus the DFLD float-plane container:
//
//   offset 0   "DFLD"
//   offset 4   u32 width
//   offset 8   u32 height
//   offset 12  u32 planes
//   offset 16  planes * height * width little-endian float32, plane-major,
//              rows top to bottom
//
// Format is picked from the file extension (.png, .pgm/.ppm).

#include <filesystem>
#include <vector>

#include "footseg/raster.hpp"

namespace footseg::io {

// 8-bit grayscale or RGB(A) PNG, or 8/16-bit PGM / 8-bit PPM. Values scaled to [0, 1].
Image read_image(const std::filesystem::path& path);
// Writes 8-bit gray (1 channel) or RGB (3 channels); values clamped to [0, 1].
void write_image(const std::filesystem::path& path, const Image& image);

// Any nonzero pixel is foreground.
BinaryMask read_mask(const std::filesystem::path& path);
// Written as 0 / 255.
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

// 16-bit single channel; ids are recompacted on read.
LabelMap read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const LabelMap& labels);

void write_gray8(const std::filesystem::path& path, const Grid<std::uint8_t>& gray);

struct FloatPlanes {
  int width = 0;
  int height = 0;
  std::vector<std::vector<float>> planes;
};

void write_dfld(const std::filesystem::path& path, const std::vector<const Grid<double>*>& planes);
FloatPlanes read_dfld(const std::filesystem::path& path);

}  // namespace footseg::io
