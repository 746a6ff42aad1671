#pragma once

// Factor-f tiling (f*f equal tiles, row-major) and its inverse, plus
// resampling to a target size.

#include <stdexcept>
#include <string>
#include <vector>

#include "footseg/raster.hpp"

namespace footseg {

namespace detail {
inline void check_divisible(int width, int height, int factor) {
  if (factor < 1) throw std::invalid_argument("tiling factor must be >= 1");
  if (width % factor != 0 || height % factor != 0)
    throw std::invalid_argument("dimensions " + std::to_string(width) + "x" + std::to_string(height) +
                                " not divisible by tiling factor " + std::to_string(factor));
}
}  // namespace detail

template <typename GridT>
std::vector<GridT> tile(const GridT& src, int factor) {
  detail::check_divisible(src.width(), src.height(), factor);
  const int tw = src.width() / factor;
  const int th = src.height() / factor;
  std::vector<GridT> tiles;
  tiles.reserve(static_cast<std::size_t>(factor) * factor);
  for (int ty = 0; ty < factor; ++ty)
    for (int tx = 0; tx < factor; ++tx) {
      GridT t(tw, th);
      for (int y = 0; y < th; ++y)
        for (int x = 0; x < tw; ++x) t(x, y) = src(tx * tw + x, ty * th + y);
      tiles.push_back(std::move(t));
    }
  return tiles;
}

template <typename GridT>
GridT stitch(const std::vector<GridT>& tiles, int factor) {
  if (factor < 1 || tiles.size() != static_cast<std::size_t>(factor) * factor)
    throw std::invalid_argument("stitch: expected factor^2 tiles");
  const int tw = tiles.front().width();
  const int th = tiles.front().height();
  GridT out(tw * factor, th * factor);
  for (int ty = 0; ty < factor; ++ty)
    for (int tx = 0; tx < factor; ++tx) {
      const GridT& t = tiles[static_cast<std::size_t>(ty) * factor + tx];
      if (t.width() != tw || t.height() != th) throw std::invalid_argument("stitch: tile sizes differ");
      for (int y = 0; y < th; ++y)
        for (int x = 0; x < tw; ++x) out(tx * tw + x, ty * th + y) = t(x, y);
    }
  return out;
}

std::vector<Image> tile(const Image& src, int factor);
Image stitch(const std::vector<Image>& tiles, int factor);
// Label tiles are recompacted, so instance ids restart at 1 in every tile.
std::vector<LabelMap> tile(const LabelMap& src, int factor);

enum class ResizeMode { bilinear, nearest };

// Half-pixel-center sampling. Bilinear is for images; nearest keeps class
// and label values intact. Throws on a non-positive target.
Image resize(const Image& src, int width, int height, ResizeMode mode = ResizeMode::bilinear);
BinaryMask resize_nearest(const BinaryMask& src, int width, int height);
LabelMap resize_nearest(const LabelMap& src, int width, int height);

}  // namespace footseg
