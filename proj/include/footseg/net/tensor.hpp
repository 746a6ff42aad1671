#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace footseg::net {

// Dense NCHW tensor.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w, T fill = T{0}) : n_(n), c_(c), h_(h), w_(w) {
    if (n < 0 || c < 0 || h < 0 || w < 0) throw std::invalid_argument("negative tensor dimension");
    data_.assign(static_cast<std::size_t>(n) * c * h * w, fill);
  }

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane_size() const { return static_cast<std::size_t>(h_) * w_; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  // Pointer to the (n, c) feature plane.
  T* plane(int n, int c) { return data_.data() + (static_cast<std::size_t>(n) * c_ + c) * plane_size(); }
  const T* plane(int n, int c) const {
    return data_.data() + (static_cast<std::size_t>(n) * c_ + c) * plane_size();
  }
  T& at(int n, int c, int y, int x) { return plane(n, c)[static_cast<std::size_t>(y) * w_ + x]; }
  T at(int n, int c, int y, int x) const { return plane(n, c)[static_cast<std::size_t>(y) * w_ + x]; }

  bool same_shape(const Tensor& o) const { return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_; }
  std::string shape_string() const {
    return "(" + std::to_string(n_) + "," + std::to_string(c_) + "," + std::to_string(h_) + "," +
           std::to_string(w_) + ")";
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
  std::vector<T> data_;
};

}  // namespace footseg::net
