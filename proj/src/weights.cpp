#include "footseg/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "footseg/distance.hpp"

namespace footseg {

void WeightParams::validate() const {
  if (!(w0 > 0.0) || !(sigma > 0.0) || !(p > 0.0))
    throw std::invalid_argument("weight parameters w0, sigma and p must be positive");
}

double WeightParams::theoretical_max() const {
  const double class_max = class_balance == ClassBalance::uniform ? 1.0 : kClassWeightMax;
  return class_max + w0;
}

WeightMap class_balance_map(const BinaryMask& mask, ClassBalance mode) {
  WeightMap out(mask.width(), mask.height(), 1.0);
  if (mode == ClassBalance::uniform) return out;

  const double total = static_cast<double>(mask.size());
  const double fg = static_cast<double>(mask.foreground_count());
  const double bg = total - fg;
  auto weight = [&](double count) {
    if (count == 0.0) return kClassWeightMax;
    return std::clamp(total / (2.0 * count), kClassWeightMin, kClassWeightMax);
  };
  const double w_fg = weight(fg);
  const double w_bg = weight(bg);
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? w_fg : w_bg;
  return out;
}

WeightMap unet_weight_map(const BinaryMask& mask, const LabelMap& labels, const DistanceField& dist,
                          const WeightParams& params) {
  params.validate();
  if (!mask.same_shape(labels.width(), labels.height()) || !mask.same_shape(dist.d1) ||
      !mask.same_shape(dist.d2))
    throw std::invalid_argument("weight map inputs differ in dimensions");

  WeightMap w = class_balance_map(mask, params.class_balance);
  const double denom = 2.0 * params.sigma * params.sigma;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (std::isinf(dist.d2[i])) continue;
    const double s = dist.d1[i] + dist.d2[i];
    w[i] += params.w0 * std::exp(-(s * s) / denom);
  }
  return w;
}

WeightMap exp_weight_map(const WeightMap& w, const WeightParams& params) {
  params.validate();
  const double scale = params.p / params.theoretical_max();
  WeightMap out(w.width(), w.height());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = std::exp(scale * w[i]);
  return out;
}

WeightMaps compute_weight_maps(const LabelMap& labels, const WeightParams& params) {
  const BinaryMask mask = labels.to_mask();
  const DistanceField dist = two_nearest_distances(labels);
  WeightMap boundary = unet_weight_map(mask, labels, dist, params);
  WeightMap exponentiated = exp_weight_map(boundary, params);
  return {std::move(boundary), std::move(exponentiated)};
}

}  // namespace footseg
