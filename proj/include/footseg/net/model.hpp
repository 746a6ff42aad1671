#pragma once

// MiniSegNet: a small encoder-decoder segmentation network.
//
//   stem      3x3/2   in -> 16                       (H/2)
//   down      3x3/2   16 -> 32                       (H/4)
//   dil_a     3x3 d2  32 -> 32
//   dil_b     3x3 d4  32 -> 32
//   pyramid   3x3 at rates {1, 2, 4} + 1x1, each 32 -> 32, concatenated (128)
//   fuse      1x1     128 -> 32
//   decoder   x2 bilinear, concat with skip (1x1 16 -> 8 on stem output),
//             3x3 40 -> 32, x2 bilinear, 1x1 32 -> 2 logits
//
// Every conv except the classifier is followed by ReLU. The plain variant
// replaces every dilation with 1 and has the same parameter count. Inputs
// are standardized with a fixed mean/std; there is no batch normalization.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "footseg/net/layers.hpp"
#include "footseg/net/tensor.hpp"

namespace footseg::net {

struct NetConfig {
  int in_channels = 3;
  bool dilated = true;
  float input_mean = 0.5f;
  float input_std = 0.25f;
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

template <typename T>
struct ConvLayer {
  std::string name;
  ConvSpec spec;
  std::vector<T> weight;
  std::vector<T> bias;
};

template <typename T>
struct LayerGrads {
  std::vector<T> weight;
  std::vector<T> bias;
};

template <typename T>
using Gradients = std::vector<LayerGrads<T>>;

enum LayerIndex : int {
  kStem = 0,
  kDown,
  kDilA,
  kDilB,
  kPyramidRate1,
  kPyramidRate2,
  kPyramidRate4,
  kPyramidPoint,
  kFuse,
  kSkip,
  kDecode,
  kClassifier,
  kLayerCount
};

template <typename T>
struct ForwardCache {
  Tensor<T> input;  // standardized
  Tensor<T> stem, down, dil_a, dil_b;
  Tensor<T> rate1, rate2, rate4, point, pyramid, fused;
  Tensor<T> up1, skip, decoder_in, decoded, up2;
};

template <typename T>
class MiniSegNet {
 public:
  explicit MiniSegNet(NetConfig config = {});

  // Fan-in scaled uniform weights, zero biases, zero classifier.
  void initialize(std::uint64_t seed);

  // images: (N, in_channels, H, W) with H, W divisible by 4. Returns
  // (N, 2, H, W) logits; channel 0 = background, 1 = building.
  Tensor<T> forward(const Tensor<T>& images, ForwardCache<T>* cache = nullptr) const;
  Gradients<T> backward(const ForwardCache<T>& cache, const Tensor<T>& grad_logits) const;

  const NetConfig& config() const { return config_; }
  std::vector<ConvLayer<T>>& layers() { return layers_; }
  const std::vector<ConvLayer<T>>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  template <typename U>
  MiniSegNet<U> cast() const {
    MiniSegNet<U> out(config_);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      out.layers()[i].weight.assign(layers_[i].weight.begin(), layers_[i].weight.end());
      out.layers()[i].bias.assign(layers_[i].bias.begin(), layers_[i].bias.end());
    }
    return out;
  }

 private:
  NetConfig config_;
  std::vector<ConvLayer<T>> layers_;
};

// Layer specs for a network configuration, in LayerIndex order.
std::vector<std::pair<std::string, ConvSpec>> minisegnet_specs(const NetConfig& config);

// Receptive field (pixels, one axis) of a sequential conv stack.
int receptive_field(std::span<const ConvSpec> stack);

// p <- p - lr * (g + l2 * p). Throws on size mismatch.
template <typename T>
void sgd_step(std::span<T> params, std::span<const T> grads, double lr, double l2);
template <typename T>
void sgd_step(MiniSegNet<T>& net, const Gradients<T>& grads, double lr, double l2);

}  // namespace footseg::net
