#pragma once

// Pixel-level confusion counts and the reported scores (precision, recall,
// F-1, class-mean IoU, building IoU with per-image dispersion).

#include <cstdint>
#include <span>
#include <vector>

#include "footseg/raster.hpp"

namespace footseg {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double miou = 0.0;
  double iou_background = 0.0;
  double iou_building = 0.0;          // pooled over all images
  double iou_building_mean = 0.0;     // mean of per-image values
  double iou_building_std = 0.0;      // population std of per-image values
  std::vector<double> per_image;      // per-image building IoU
  ConfusionCounts pooled;
};

inline constexpr double kDecisionThreshold = 0.5;

ConfusionCounts accumulate(const BinaryMask& truth, const BinaryMask& predicted);

// Building where probability >= 0.5.
BinaryMask threshold(std::span<const double> building_prob, int width, int height);

// Pooled scores plus per-image building IoU dispersion. Throws on an empty list.
MetricsReport compute_report(std::span<const ConfusionCounts> per_image);

// Building IoU of a single confusion count, with 0/0 = 1.
double building_iou(const ConfusionCounts& c);

}  // namespace footseg
