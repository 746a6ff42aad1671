#pragma once

// Stateless layer primitives with exact backward passes. Implemented for
// float (training) and double (gradient checks).

#include <span>
#include <vector>

#include "footseg/net/tensor.hpp"

namespace footseg::net {

struct ConvSpec {
  int in_channels = 1;
  int out_channels = 1;
  int kernel = 3;  // 1 or 3
  int stride = 1;
  int dilation = 1;

  void validate() const;
  int extent() const { return (kernel - 1) * dilation + 1; }
  // Zero padding that keeps the spatial size at stride 1.
  int padding() const { return (extent() - 1) / 2; }
  int out_size(int in) const { return (in + 2 * padding() - extent()) / stride + 1; }
  std::size_t weight_count() const {
    return static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel;
  }
  std::size_t parameter_count() const { return weight_count() + static_cast<std::size_t>(out_channels); }
};

// Weights are laid out [out][in][ky][kx].
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const ConvSpec& spec, std::span<const T> weight,
                         std::span<const T> bias);

template <typename T>
struct ConvGrads {
  Tensor<T> grad_x;
  std::vector<T> grad_w;
  std::vector<T> grad_b;
};

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const ConvSpec& spec,
                             std::span<const T> weight);

// Half-pixel-center bilinear resampling by an integer factor (edges clamp).
template <typename T>
Tensor<T> bilinear_upsample(const Tensor<T>& x, int factor);
// Exact transpose of bilinear_upsample; returns a tensor shaped like its input.
template <typename T>
Tensor<T> bilinear_upsample_backward(const Tensor<T>& grad_out, int factor);

template <typename T>
void relu_inplace(Tensor<T>& x);
// Zeroes grad where the forward output was not positive.
template <typename T>
void relu_backward_inplace(Tensor<T>& grad, const Tensor<T>& output);

template <typename T>
Tensor<T> concat_channels(const std::vector<const Tensor<T>*>& parts);
template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& grad, const std::vector<int>& channels);

}  // namespace footseg::net
