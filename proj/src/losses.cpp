#include "footseg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace footseg {
namespace {

void require_size(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got)
    throw std::invalid_argument(std::string(what) + ": size mismatch (" + std::to_string(expected) +
                                " vs " + std::to_string(got) + ")");
}

void require_shape(const BinaryMask& y, const Prediction& pred) {
  if (y.width() != pred.width() || y.height() != pred.height())
    throw std::invalid_argument("prediction and ground truth differ in dimensions");
}

void require_weights(const BinaryMask& y, const WeightMap& w) {
  if (!y.same_shape(w)) throw std::invalid_argument("weight map and ground truth differ in dimensions");
  for (double v : w.values())
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("weights must be finite and positive");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

void FBetaForm::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("F-beta requires beta > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("F-beta requires epsilon > 0");
}

Prediction Prediction::from_logits(int width, int height, std::span<const double> background,
                                   std::span<const double> building) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  require_size(n, background.size(), "background logits");
  require_size(n, building.size(), "building logits");
  Prediction p;
  p.width_ = width;
  p.height_ = height;
  p.background_logit_.assign(background.begin(), background.end());
  p.building_logit_.assign(building.begin(), building.end());
  p.background_prob_.resize(n);
  p.building_prob_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double delta = building[i] - background[i];
    p.building_prob_[i] = sigmoid(delta);
    p.background_prob_[i] = sigmoid(-delta);
  }
  return p;
}

Prediction Prediction::from_probabilities(int width, int height, std::span<const double> building) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  require_size(n, building.size(), "building probabilities");
  Prediction p;
  p.width_ = width;
  p.height_ = height;
  p.building_prob_.assign(building.begin(), building.end());
  p.background_prob_.resize(n);
  p.building_logit_.resize(n);
  p.background_logit_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = building[i];
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("probability outside [0, 1]");
    p.background_prob_[i] = 1.0 - q;
    p.building_logit_[i] = std::log(q);
    p.background_logit_[i] = std::log(1.0 - q);
  }
  return p;
}

FBetaParts fbeta_parts(const BinaryMask& y, std::span<const double> yhat, const FBetaForm& form) {
  form.validate();
  require_size(y.size(), yhat.size(), "F-beta");
  FBetaParts parts;
  for (std::size_t i = 0; i < yhat.size(); ++i) {
    const double t = y[i];
    parts.intersection += t * yhat[i];
    parts.gt_sum += t;
    parts.pred_sum += yhat[i];
  }
  const double b2 = form.beta * form.beta;
  parts.numerator = (1.0 + b2) * parts.intersection + form.epsilon;
  parts.denominator = form.variant == FBetaVariant::standard
                          ? b2 * parts.gt_sum + parts.pred_sum + form.epsilon
                          : b2 * (parts.gt_sum + parts.pred_sum) + form.epsilon;
  parts.value = parts.numerator / parts.denominator;
  return parts;
}

double fbeta_measure(const BinaryMask& y, std::span<const double> yhat, const FBetaForm& form) {
  return fbeta_parts(y, yhat, form).value;
}

std::vector<double> fbeta_grad(const BinaryMask& y, std::span<const double> yhat, const FBetaForm& form) {
  const FBetaParts parts = fbeta_parts(y, yhat, form);
  const double b2 = form.beta * form.beta;
  const double d_denominator = form.variant == FBetaVariant::standard ? 1.0 : b2;
  const double d2 = parts.denominator * parts.denominator;
  std::vector<double> grad(yhat.size());
  for (std::size_t i = 0; i < yhat.size(); ++i)
    grad[i] = ((1.0 + b2) * y[i] * parts.denominator - parts.numerator * d_denominator) / d2;
  return grad;
}

double weighted_cross_entropy(const BinaryMask& y, const Prediction& pred, const WeightMap& weights) {
  require_shape(y, pred);
  require_weights(y, weights);
  const auto fg = pred.building();
  const auto bg = pred.background();
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p_true = std::clamp(y[i] ? fg[i] : bg[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    sum += weights[i] * std::log(p_true);
  }
  return -sum / static_cast<double>(pred.size());
}

LogitGrad wce_grad(const BinaryMask& y, const Prediction& pred, const WeightMap& weights) {
  require_shape(y, pred);
  require_weights(y, weights);
  const auto fg = pred.building();
  const auto bg = pred.background();
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  LogitGrad g;
  g.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p_true = y[i] ? fg[i] : bg[i];
    if (p_true < kProbabilityClamp || p_true > 1.0 - kProbabilityClamp) continue;
    // d(-ln p_t)/d l_t = -(1 - p_t); d(-ln p_t)/d l_other = 1 - p_t
    const double s = weights[i] * (1.0 - p_true) * inv_n;
    if (y[i]) {
      g.building[i] = -s;
      g.background[i] = s;
    } else {
      g.background[i] = -s;
      g.building[i] = s;
    }
  }
  return g;
}

LossTerms evaluate_objective(const BinaryMask& y, const Prediction& pred, const WeightMap* weights,
                             const ObjectiveSpec& spec, LogitGrad* grad) {
  require_shape(y, pred);
  LossTerms terms;
  if (grad) grad->resize(pred.size());

  if (spec.cross_entropy) {
    const WeightMap unit(y.width(), y.height(), 1.0);
    const WeightMap& w = weights ? *weights : unit;
    terms.wce = weighted_cross_entropy(y, pred, w);
    terms.total += terms.wce;
    if (grad) {
      const LogitGrad g = wce_grad(y, pred, w);
      for (std::size_t i = 0; i < pred.size(); ++i) {
        grad->background[i] += g.background[i];
        grad->building[i] += g.building[i];
      }
    }
  }

  const FBetaParts parts = fbeta_parts(y, pred.building(), spec.form);
  terms.intersection = parts.intersection;
  terms.gt_sum = parts.gt_sum;
  terms.pred_sum = parts.pred_sum;
  terms.fbeta = parts.value;
  if (spec.fbeta) {
    terms.total += 1.0 - parts.value;
    if (grad) {
      const std::vector<double> df = fbeta_grad(y, pred.building(), spec.form);
      const auto fg = pred.building();
      for (std::size_t i = 0; i < pred.size(); ++i) {
        // d(1 - F)/d l_fg = -dF/dp * p (1 - p); the background logit enters with opposite sign.
        const double chain = -df[i] * fg[i] * (1.0 - fg[i]);
        grad->building[i] += chain;
        grad->background[i] -= chain;
      }
    }
  }
  return terms;
}

LossTerms combined_objective(const BinaryMask& y, const Prediction& pred, const WeightMap* weights,
                             const FBetaForm& form) {
  return evaluate_objective(y, pred, weights, ObjectiveSpec{true, true, form});
}

}  // namespace footseg
