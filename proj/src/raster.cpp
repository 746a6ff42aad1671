#include "footseg/raster.hpp"

#include <algorithm>
#include <unordered_map>

namespace footseg {

void BinaryMask::validate() const {
  for (std::uint8_t v : values())
    if (v > 1) throw std::invalid_argument("binary mask value outside {0, 1}: " + std::to_string(v));
}

std::size_t BinaryMask::foreground_count() const {
  return static_cast<std::size_t>(std::count(values().begin(), values().end(), std::uint8_t{1}));
}

LabelMap::LabelMap(Grid<std::int32_t> labels, int component_count)
    : labels_(std::move(labels)), count_(component_count) {
  if (component_count < 0) throw std::invalid_argument("negative component count");
  std::vector<bool> seen(static_cast<std::size_t>(component_count) + 1, false);
  for (std::int32_t v : labels_.values()) {
    if (v < 0 || v > component_count)
      throw std::invalid_argument("label " + std::to_string(v) + " outside [0, " +
                                  std::to_string(component_count) + "]");
    seen[static_cast<std::size_t>(v)] = true;
  }
  for (int k = 1; k <= component_count; ++k)
    if (!seen[static_cast<std::size_t>(k)])
      throw std::invalid_argument("label " + std::to_string(k) + " has no pixels");
}

BinaryMask LabelMap::to_mask() const {
  BinaryMask mask(width(), height());
  for (std::size_t i = 0; i < labels_.size(); ++i) mask[i] = labels_[i] > 0 ? 1 : 0;
  return mask;
}

LabelMap LabelMap::compact(const Grid<std::int32_t>& raw) {
  Grid<std::int32_t> out(raw.width(), raw.height(), 0);
  std::unordered_map<std::int32_t, std::int32_t> remap;
  std::int32_t next = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::int32_t v = raw[i];
    if (v <= 0) continue;
    auto [it, inserted] = remap.try_emplace(v, next + 1);
    if (inserted) ++next;
    out[i] = it->second;
  }
  return LabelMap(std::move(out), next);
}

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || channels <= 0)
    throw std::invalid_argument("image dimensions must be positive");
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

}  // namespace footseg
