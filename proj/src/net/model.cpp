#include "footseg/net/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace footseg::net {
namespace {

template <typename T>
Tensor<T> conv(const ConvLayer<T>& layer, const Tensor<T>& x, bool relu) {
  Tensor<T> y = conv2d_forward<T>(x, layer.spec, layer.weight, layer.bias);
  if (relu) relu_inplace(y);
  return y;
}

template <typename T>
void add_into(Tensor<T>& acc, const Tensor<T>& g) {
  if (!acc.same_shape(g)) throw std::logic_error("gradient shape mismatch");
  auto a = acc.values();
  auto b = g.values();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

// Backward through conv (+ optional ReLU on its output); stores parameter
// gradients and returns the input gradient.
template <typename T>
Tensor<T> conv_back(const ConvLayer<T>& layer, const Tensor<T>& input, const Tensor<T>* relu_output,
                    Tensor<T> grad, LayerGrads<T>& out) {
  if (relu_output) relu_backward_inplace(grad, *relu_output);
  ConvGrads<T> g = conv2d_backward<T>(grad, input, layer.spec, layer.weight);
  out.weight = std::move(g.grad_w);
  out.bias = std::move(g.grad_b);
  return std::move(g.grad_x);
}

}  // namespace

std::vector<std::pair<std::string, ConvSpec>> minisegnet_specs(const NetConfig& config) {
  const int d2 = config.dilated ? 2 : 1;
  const int d4 = config.dilated ? 4 : 1;
  return {
      {"stem", {config.in_channels, 16, 3, 2, 1}},
      {"down", {16, 32, 3, 2, 1}},
      {"dil_a", {32, 32, 3, 1, d2}},
      {"dil_b", {32, 32, 3, 1, d4}},
      {"pyramid_r1", {32, 32, 3, 1, 1}},
      {"pyramid_r2", {32, 32, 3, 1, d2}},
      {"pyramid_r4", {32, 32, 3, 1, d4}},
      {"pyramid_1x1", {32, 32, 1, 1, 1}},
      {"fuse", {128, 32, 1, 1, 1}},
      {"skip", {16, 8, 1, 1, 1}},
      {"decode", {40, 32, 3, 1, 1}},
      {"classifier", {32, 2, 1, 1, 1}},
  };
}

int receptive_field(std::span<const ConvSpec> stack) {
  int field = 1;
  int jump = 1;
  for (const ConvSpec& s : stack) {
    field += (s.extent() - 1) * jump;
    jump *= s.stride;
  }
  return field;
}

template <typename T>
MiniSegNet<T>::MiniSegNet(NetConfig config) : config_(config) {
  for (auto& [name, spec] : minisegnet_specs(config)) {
    spec.validate();
    layers_.push_back({name, spec, std::vector<T>(spec.weight_count(), T{0}),
                       std::vector<T>(static_cast<std::size_t>(spec.out_channels), T{0})});
  }
}

template <typename T>
void MiniSegNet<T>::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& layer : layers_) {
    std::fill(layer.bias.begin(), layer.bias.end(), T{0});
    if (&layer == &layers_[kClassifier]) {
      std::fill(layer.weight.begin(), layer.weight.end(), T{0});
      continue;
    }
    const double fan_in = static_cast<double>(layer.spec.in_channels) * layer.spec.kernel * layer.spec.kernel;
    std::uniform_real_distribution<double> dist(-std::sqrt(6.0 / fan_in), std::sqrt(6.0 / fan_in));
    for (T& w : layer.weight) w = static_cast<T>(dist(rng));
  }
}

template <typename T>
std::size_t MiniSegNet<T>::parameter_count() const {
  std::size_t total = 0;
  for (const auto& l : layers_) total += l.weight.size() + l.bias.size();
  return total;
}

template <typename T>
Tensor<T> MiniSegNet<T>::forward(const Tensor<T>& images, ForwardCache<T>* cache) const {
  if (images.c() != config_.in_channels)
    throw std::invalid_argument("MiniSegNet: expected " + std::to_string(config_.in_channels) +
                                " input channels, got " + std::to_string(images.c()));
  if (images.h() % 4 != 0 || images.w() % 4 != 0 || images.h() == 0 || images.w() == 0)
    throw std::invalid_argument("MiniSegNet: input height and width must be positive multiples of 4");

  ForwardCache<T> local;
  ForwardCache<T>& c = cache ? *cache : local;
  const auto& L = layers_;

  c.input = images;
  const T mean = static_cast<T>(config_.input_mean);
  const T inv_std = T{1} / static_cast<T>(config_.input_std);
  for (T& v : c.input.values()) v = (v - mean) * inv_std;

  c.stem = conv(L[kStem], c.input, true);
  c.down = conv(L[kDown], c.stem, true);
  c.dil_a = conv(L[kDilA], c.down, true);
  c.dil_b = conv(L[kDilB], c.dil_a, true);
  c.rate1 = conv(L[kPyramidRate1], c.dil_b, true);
  c.rate2 = conv(L[kPyramidRate2], c.dil_b, true);
  c.rate4 = conv(L[kPyramidRate4], c.dil_b, true);
  c.point = conv(L[kPyramidPoint], c.dil_b, true);
  c.pyramid = concat_channels<T>({&c.rate1, &c.rate2, &c.rate4, &c.point});
  c.fused = conv(L[kFuse], c.pyramid, true);
  c.up1 = bilinear_upsample(c.fused, 2);
  c.skip = conv(L[kSkip], c.stem, true);
  c.decoder_in = concat_channels<T>({&c.up1, &c.skip});
  c.decoded = conv(L[kDecode], c.decoder_in, true);
  c.up2 = bilinear_upsample(c.decoded, 2);
  return conv(L[kClassifier], c.up2, false);
}

template <typename T>
Gradients<T> MiniSegNet<T>::backward(const ForwardCache<T>& c, const Tensor<T>& grad_logits) const {
  const auto& L = layers_;
  Gradients<T> g(kLayerCount);

  Tensor<T> g_up2 = conv_back<T>(L[kClassifier], c.up2, nullptr, grad_logits, g[kClassifier]);
  Tensor<T> g_decoded = bilinear_upsample_backward(g_up2, 2);
  Tensor<T> g_decoder_in = conv_back(L[kDecode], c.decoder_in, &c.decoded, std::move(g_decoded), g[kDecode]);
  auto dec_parts = split_channels(g_decoder_in, {c.up1.c(), c.skip.c()});
  Tensor<T> g_stem = conv_back(L[kSkip], c.stem, &c.skip, std::move(dec_parts[1]), g[kSkip]);
  Tensor<T> g_fused = bilinear_upsample_backward(dec_parts[0], 2);
  Tensor<T> g_pyramid = conv_back(L[kFuse], c.pyramid, &c.fused, std::move(g_fused), g[kFuse]);
  auto pyr = split_channels(g_pyramid, {c.rate1.c(), c.rate2.c(), c.rate4.c(), c.point.c()});

  Tensor<T> g_dil_b = conv_back(L[kPyramidRate1], c.dil_b, &c.rate1, std::move(pyr[0]), g[kPyramidRate1]);
  add_into(g_dil_b, conv_back(L[kPyramidRate2], c.dil_b, &c.rate2, std::move(pyr[1]), g[kPyramidRate2]));
  add_into(g_dil_b, conv_back(L[kPyramidRate4], c.dil_b, &c.rate4, std::move(pyr[2]), g[kPyramidRate4]));
  add_into(g_dil_b, conv_back(L[kPyramidPoint], c.dil_b, &c.point, std::move(pyr[3]), g[kPyramidPoint]));

  Tensor<T> g_dil_a = conv_back(L[kDilB], c.dil_a, &c.dil_b, std::move(g_dil_b), g[kDilB]);
  Tensor<T> g_down = conv_back(L[kDilA], c.down, &c.dil_a, std::move(g_dil_a), g[kDilA]);
  add_into(g_stem, conv_back(L[kDown], c.stem, &c.down, std::move(g_down), g[kDown]));
  conv_back(L[kStem], c.input, &c.stem, std::move(g_stem), g[kStem]);
  return g;
}

template <typename T>
void sgd_step(std::span<T> params, std::span<const T> grads, double lr, double l2) {
  if (params.size() != grads.size()) throw std::invalid_argument("sgd_step: parameter/gradient size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i)
    params[i] = static_cast<T>(params[i] - lr * (grads[i] + l2 * params[i]));
}

template <typename T>
void sgd_step(MiniSegNet<T>& net, const Gradients<T>& grads, double lr, double l2) {
  auto& layers = net.layers();
  if (grads.size() != layers.size()) throw std::invalid_argument("sgd_step: layer count mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    sgd_step<T>(layers[i].weight, grads[i].weight, lr, l2);
    sgd_step<T>(layers[i].bias, grads[i].bias, lr, l2);
  }
}

template class MiniSegNet<float>;
template class MiniSegNet<double>;
template void sgd_step<float>(std::span<float>, std::span<const float>, double, double);
template void sgd_step<double>(std::span<double>, std::span<const double>, double, double);
template void sgd_step<float>(MiniSegNet<float>&, const Gradients<float>&, double, double);
template void sgd_step<double>(MiniSegNet<double>&, const Gradients<double>&, double, double);

}  // namespace footseg::net
