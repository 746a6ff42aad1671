#pragma once

// Segmentation objectives: the soft F-Beta measure, (weighted) cross-entropy
// and their sum, with closed-form gradients.
//
// All losses work on one image at a time in double precision. Batch-level
// losses are the mean of per-image losses.

#include <span>
#include <vector>

#include "footseg/raster.hpp"

namespace footseg {

enum class FBetaVariant {
  // ((1+b^2) I + eps) / (b^2 S + S_hat + eps): the usual precision/recall trade-off.
  standard,
  // ((1+b^2) I + eps) / (b^2 (S + S_hat) + eps): a rescaled DICE.
  literal,
};

struct FBetaForm {
  FBetaVariant variant = FBetaVariant::standard;
  double beta = 1.0;
  double epsilon = 1.0;

  void validate() const;
};

// Two-class softmax output for one image. Planes are row-major, width*height.
class Prediction {
 public:
  static Prediction from_logits(int width, int height, std::span<const double> background,
                                std::span<const double> building);
  // Logits are chosen as log-probabilities; probabilities must lie in [0, 1].
  static Prediction from_probabilities(int width, int height, std::span<const double> building);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return building_prob_.size(); }
  std::span<const double> building() const { return building_prob_; }
  std::span<const double> background() const { return background_prob_; }
  std::span<const double> building_logits() const { return building_logit_; }
  std::span<const double> background_logits() const { return background_logit_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> background_logit_, building_logit_;
  std::vector<double> background_prob_, building_prob_;
};

// Gradient with respect to the two logit planes.
struct LogitGrad {
  std::vector<double> background;
  std::vector<double> building;

  void resize(std::size_t n) {
    background.assign(n, 0.0);
    building.assign(n, 0.0);
  }
};

struct FBetaParts {
  double intersection = 0.0;  // sum y * yhat
  double gt_sum = 0.0;        // sum y
  double pred_sum = 0.0;      // sum yhat
  double numerator = 0.0;
  double denominator = 0.0;
  double value = 0.0;
};

FBetaParts fbeta_parts(const BinaryMask& y, std::span<const double> yhat, const FBetaForm& form);
double fbeta_measure(const BinaryMask& y, std::span<const double> yhat, const FBetaForm& form);
// dF / d yhat_k
std::vector<double> fbeta_grad(const BinaryMask& y, std::span<const double> yhat, const FBetaForm& form);

inline constexpr double kProbabilityClamp = 1e-7;

// -(1/N) sum W_ij ln p(true class), probabilities clamped to [1e-7, 1 - 1e-7].
double weighted_cross_entropy(const BinaryMask& y, const Prediction& pred, const WeightMap& weights);
LogitGrad wce_grad(const BinaryMask& y, const Prediction& pred, const WeightMap& weights);

struct LossTerms {
  double intersection = 0.0;
  double gt_sum = 0.0;
  double pred_sum = 0.0;
  double fbeta = 0.0;
  double wce = 0.0;
  double total = 0.0;
};

// Which parts of the objective are active. Cross-entropy uses the given
// weight map, or unit weights when none is supplied.
struct ObjectiveSpec {
  bool cross_entropy = true;
  bool fbeta = true;
  FBetaForm form;
};

// total = [CE] + [1 - F_beta]; `grad`, when non-null, receives d total / d logits.
LossTerms evaluate_objective(const BinaryMask& y, const Prediction& pred, const WeightMap* weights,
                             const ObjectiveSpec& spec, LogitGrad* grad = nullptr);

// total = WCE(weights or unit) + (1 - F_beta)
LossTerms combined_objective(const BinaryMask& y, const Prediction& pred, const WeightMap* weights,
                             const FBetaForm& form);

}  // namespace footseg
