#include "footseg/ingest/tiling.hpp"

#include <algorithm>
#include <cmath>

namespace footseg {
namespace {

void check_target(int width, int height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("resize target must be positive");
}

int nearest_index(int dst, int src_size, int dst_size) {
  const int i = static_cast<int>(std::floor((dst + 0.5) * src_size / dst_size));
  return std::clamp(i, 0, src_size - 1);
}

template <typename GridT>
GridT resize_grid_nearest(const GridT& src, int width, int height) {
  check_target(width, height);
  if (src.width() == width && src.height() == height) return src;
  GridT out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = nearest_index(y, src.height(), height);
    for (int x = 0; x < width; ++x) out(x, y) = src(nearest_index(x, src.width(), width), sy);
  }
  return out;
}

struct Tap {
  int lo, hi;
  float t;
};

Tap bilinear_tap(int dst, int src_size, int dst_size) {
  double s = (dst + 0.5) * src_size / dst_size - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(src_size - 1));
  const int lo = static_cast<int>(std::floor(s));
  const int hi = std::min(lo + 1, src_size - 1);
  return {lo, hi, static_cast<float>(s - lo)};
}

}  // namespace

std::vector<Image> tile(const Image& src, int factor) {
  detail::check_divisible(src.width(), src.height(), factor);
  const int tw = src.width() / factor;
  const int th = src.height() / factor;
  std::vector<Image> tiles;
  for (int ty = 0; ty < factor; ++ty)
    for (int tx = 0; tx < factor; ++tx) {
      Image t(tw, th, src.channels());
      for (int c = 0; c < src.channels(); ++c)
        for (int y = 0; y < th; ++y)
          for (int x = 0; x < tw; ++x) t.at(c, x, y) = src.at(c, tx * tw + x, ty * th + y);
      tiles.push_back(std::move(t));
    }
  return tiles;
}

Image stitch(const std::vector<Image>& tiles, int factor) {
  if (factor < 1 || tiles.size() != static_cast<std::size_t>(factor) * factor)
    throw std::invalid_argument("stitch: expected factor^2 tiles");
  const Image& first = tiles.front();
  Image out(first.width() * factor, first.height() * factor, first.channels());
  for (int ty = 0; ty < factor; ++ty)
    for (int tx = 0; tx < factor; ++tx) {
      const Image& t = tiles[static_cast<std::size_t>(ty) * factor + tx];
      if (t.width() != first.width() || t.height() != first.height() || t.channels() != first.channels())
        throw std::invalid_argument("stitch: tile sizes differ");
      for (int c = 0; c < t.channels(); ++c)
        for (int y = 0; y < t.height(); ++y)
          for (int x = 0; x < t.width(); ++x) out.at(c, tx * t.width() + x, ty * t.height() + y) = t.at(c, x, y);
    }
  return out;
}

std::vector<LabelMap> tile(const LabelMap& src, int factor) {
  std::vector<LabelMap> out;
  for (const auto& g : tile(src.grid(), factor)) out.push_back(LabelMap::compact(g));
  return out;
}

Image resize(const Image& src, int width, int height, ResizeMode mode) {
  check_target(width, height);
  if (src.width() == width && src.height() == height) return src;
  Image out(width, height, src.channels());
  if (mode == ResizeMode::nearest) {
    for (int c = 0; c < src.channels(); ++c)
      for (int y = 0; y < height; ++y) {
        const int sy = nearest_index(y, src.height(), height);
        for (int x = 0; x < width; ++x) out.at(c, x, y) = src.at(c, nearest_index(x, src.width(), width), sy);
      }
    return out;
  }
  std::vector<Tap> xt(width), yt(height);
  for (int x = 0; x < width; ++x) xt[x] = bilinear_tap(x, src.width(), width);
  for (int y = 0; y < height; ++y) yt[y] = bilinear_tap(y, src.height(), height);
  for (int c = 0; c < src.channels(); ++c)
    for (int y = 0; y < height; ++y) {
      const Tap ty = yt[y];
      for (int x = 0; x < width; ++x) {
        const Tap tx = xt[x];
        const float a = src.at(c, tx.lo, ty.lo);
        const float b = src.at(c, tx.hi, ty.lo);
        const float d = src.at(c, tx.lo, ty.hi);
        const float e = src.at(c, tx.hi, ty.hi);
        // lerp form keeps constant regions exactly constant
        const float top = a + (b - a) * tx.t;
        const float bottom = d + (e - d) * tx.t;
        out.at(c, x, y) = top + (bottom - top) * ty.t;
      }
    }
  return out;
}

BinaryMask resize_nearest(const BinaryMask& src, int width, int height) {
  return resize_grid_nearest(src, width, height);
}

LabelMap resize_nearest(const LabelMap& src, int width, int height) {
  return LabelMap::compact(resize_grid_nearest(src.grid(), width, height));
}

}  // namespace footseg
