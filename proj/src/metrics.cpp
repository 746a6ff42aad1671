#include "footseg/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace footseg {
namespace {

// Empty-vs-empty scores 1, any other zero denominator scores 0.
double ratio(std::uint64_t num, std::uint64_t den, bool both_empty) {
  if (den == 0) return both_empty ? 1.0 : 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionCounts accumulate(const BinaryMask& truth, const BinaryMask& predicted) {
  if (!truth.same_shape(predicted)) throw std::invalid_argument("confusion: mask dimensions differ");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] != 0;
    const bool p = predicted[i] != 0;
    if (t && p) ++c.tp;
    else if (!t && p) ++c.fp;
    else if (t && !p) ++c.fn;
    else ++c.tn;
  }
  return c;
}

BinaryMask threshold(std::span<const double> building_prob, int width, int height) {
  BinaryMask mask(width, height);
  if (building_prob.size() != mask.size()) throw std::invalid_argument("threshold: size mismatch");
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = building_prob[i] >= kDecisionThreshold ? 1 : 0;
  return mask;
}

double building_iou(const ConfusionCounts& c) {
  return ratio(c.tp, c.tp + c.fp + c.fn, c.tp + c.fp + c.fn == 0);
}

MetricsReport compute_report(std::span<const ConfusionCounts> per_image) {
  if (per_image.empty()) throw std::invalid_argument("metrics: no images");
  MetricsReport r;
  for (const auto& c : per_image) r.pooled += c;
  const ConfusionCounts& c = r.pooled;

  const bool no_truth = c.tp + c.fn == 0;
  const bool no_pred = c.tp + c.fp == 0;
  r.precision = ratio(c.tp, c.tp + c.fp, no_truth && no_pred);
  r.recall = ratio(c.tp, c.tp + c.fn, no_truth && no_pred);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.iou_building = building_iou(c);
  r.iou_background = ratio(c.tn, c.tn + c.fp + c.fn, c.tn + c.fp + c.fn == 0);
  r.miou = 0.5 * (r.iou_building + r.iou_background);

  r.per_image.reserve(per_image.size());
  double sum = 0.0;
  for (const auto& img : per_image) {
    r.per_image.push_back(building_iou(img));
    sum += r.per_image.back();
  }
  r.iou_building_mean = sum / static_cast<double>(per_image.size());
  double var = 0.0;
  for (double v : r.per_image) var += (v - r.iou_building_mean) * (v - r.iou_building_mean);
  r.iou_building_std = std::sqrt(var / static_cast<double>(per_image.size()));
  return r;
}

}  // namespace footseg
