#pragma once

// Core raster types: a dense row-major grid, binary building masks, instance
// label maps, the two-nearest-instance distance field and multi-channel
// images.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace footseg {

template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("grid dimensions must be positive, got " + std::to_string(width) +
                                  "x" + std::to_string(height));
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Grid(int width, int height, std::vector<T> values) : Grid(width, height) {
    if (values.size() != data_.size())
      throw std::invalid_argument("grid value count does not match dimensions");
    data_ = std::move(values);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  const std::vector<T>& vector() const { return data_; }

  bool same_shape(int width, int height) const { return width_ == width && height_ == height; }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// 0 = background, 1 = building.
class BinaryMask : public Grid<std::uint8_t> {
 public:
  using Grid::Grid;
  BinaryMask() = default;

  // Throws if any value is outside {0, 1}.
  void validate() const;
  std::size_t foreground_count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

// 0 = background, k >= 1 = building instance k.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(Grid<std::int32_t> labels, int component_count);

  int width() const { return labels_.width(); }
  int height() const { return labels_.height(); }
  int component_count() const { return count_; }
  std::int32_t operator()(int x, int y) const { return labels_(x, y); }
  std::int32_t operator[](std::size_t i) const { return labels_[i]; }
  const Grid<std::int32_t>& grid() const { return labels_; }

  BinaryMask to_mask() const;

  // Renumbers labels to 1..K in raster-scan order of first appearance and
  // drops ids with no pixels.
  static LabelMap compact(const Grid<std::int32_t>& raw);

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  Grid<std::int32_t> labels_;
  int count_ = 0;
};

// Per-pixel distances (pixel units) to the nearest and second-nearest
// building instance. d2 is +infinity where fewer than two instances exist.
struct DistanceField {
  Grid<double> d1;
  Grid<double> d2;

  static constexpr double unreachable() { return std::numeric_limits<double>::infinity(); }
  int width() const { return d1.width(); }
  int height() const { return d1.height(); }
};

using WeightMap = Grid<double>;

// Planar (channel-major) float image with values nominally in [0, 1].
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  float& at(int c, int x, int y) { return data_[offset(c, x, y)]; }
  float at(int c, int x, int y) const { return data_[offset(c, x, y)]; }

  std::span<float> plane(int c) { return std::span<float>(data_).subspan(plane_offset(c), plane_size()); }
  std::span<const float> plane(int c) const {
    return std::span<const float>(data_).subspan(plane_offset(c), plane_size());
  }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t plane_size() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::size_t plane_offset(int c) const { return static_cast<std::size_t>(c) * plane_size(); }
  std::size_t offset(int c, int x, int y) const {
    return plane_offset(c) + static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

}  // namespace footseg
