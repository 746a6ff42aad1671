#pragma once

// Per-pixel loss weights: class balance, the boundary map that emphasises
// thin background gaps between neighbouring buildings, and its exponentiated
// form with values in [1, e^p].

#include "footseg/raster.hpp"

namespace footseg {

enum class ClassBalance { uniform, inverse_frequency };

struct WeightParams {
  double w0 = 10.0;    // absolute boundary emphasis
  double sigma = 7.5;  // decay, pixels
  double p = 2.0;      // exponent of the exponentiated map
  ClassBalance class_balance = ClassBalance::uniform;

  void validate() const;
  // Largest value the boundary map can take: max class weight + w0.
  double theoretical_max() const;
};

inline constexpr double kClassWeightMin = 0.1;
inline constexpr double kClassWeightMax = 10.0;

// Uniform: 1 everywhere. Inverse frequency: class c gets N / (2 N_c),
// clamped to [0.1, 10]; an absent class is assigned the upper clamp.
WeightMap class_balance_map(const BinaryMask& mask, ClassBalance mode);

// w = w_c + w0 * exp(-(d1 + d2)^2 / (2 sigma^2)); pixels with d2 = +inf
// keep w = w_c.
WeightMap unet_weight_map(const BinaryMask& mask, const LabelMap& labels, const DistanceField& dist,
                          const WeightParams& params);

// exp(p * w / theoretical_max) in [1, e^p].
WeightMap exp_weight_map(const WeightMap& w, const WeightParams& params);

// Convenience: labels -> distances -> boundary map -> exponentiated map.
struct WeightMaps {
  WeightMap boundary;
  WeightMap exponentiated;
};
WeightMaps compute_weight_maps(const LabelMap& labels, const WeightParams& params);

}  // namespace footseg
