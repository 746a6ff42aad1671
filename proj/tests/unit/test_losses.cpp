#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "footseg/losses.hpp"
#include "oracles.hpp"

using namespace footseg;

namespace {

struct SoftCase {
  BinaryMask y;
  std::vector<double> yhat;
};

SoftCase random_soft(int w, int h, std::mt19937_64& rng) {
  SoftCase c{oracle::random_mask(w, h, 0.4, rng), {}};
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (std::size_t i = 0; i < c.y.size(); ++i) c.yhat.push_back(u(rng));
  return c;
}

std::vector<double> random_logits(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.5);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// Plain binary cross-entropy from the two-class softmax, written out directly.
double bce_oracle(const BinaryMask& y, const std::vector<double>& bg, const std::vector<double>& fg) {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double p = 1.0 / (1.0 + std::exp(bg[i] - fg[i]));
    p = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
    sum -= y[i] ? std::log(p) : std::log(1.0 - p);
  }
  return sum / static_cast<double>(y.size());
}

FBetaForm form(FBetaVariant v, double beta) {
  FBetaForm f;
  f.variant = v;
  f.beta = beta;
  return f;
}

}  // namespace

TEST(FBeta, PerfectHardPredictionIsOne) {
  std::mt19937_64 rng(1);
  const auto y = oracle::random_mask(8, 8, 0.5, rng);
  std::vector<double> yhat(y.values().begin(), y.values().end());
  for (double beta : {0.1, 0.5, 1.0, 2.0, 4.0})
    EXPECT_NEAR(fbeta_measure(y, yhat, form(FBetaVariant::standard, beta)), 1.0, 1e-15);
}

TEST(FBeta, FalsePositivesPunishedHarderAtSmallBeta) {
  BinaryMask y(6, 1);
  y[0] = y[1] = 1;
  const std::vector<double> yhat{1, 1, 1, 1, 0, 0};
  auto f = form(FBetaVariant::standard, 2.0);
  f.epsilon = 1e-300;
  EXPECT_NEAR(fbeta_measure(y, yhat, f), 10.0 / 12.0, 1e-15);
  f.beta = 0.5;
  EXPECT_NEAR(fbeta_measure(y, yhat, f), 2.5 / 4.5, 1e-15);
}

TEST(FBeta, PartsReportCounts) {
  BinaryMask y(3, 1);
  y[0] = 1;
  const std::vector<double> yhat{0.5, 0.25, 0.0};
  const auto parts = fbeta_parts(y, yhat, form(FBetaVariant::standard, 1.0));
  EXPECT_DOUBLE_EQ(parts.intersection, 0.5);
  EXPECT_DOUBLE_EQ(parts.gt_sum, 1.0);
  EXPECT_DOUBLE_EQ(parts.pred_sum, 0.75);
  EXPECT_DOUBLE_EQ(parts.value, parts.numerator / parts.denominator);
}

TEST(FBeta, LiteralFormIsRescaledDice) {
  std::mt19937_64 rng(2);
  for (double beta : {0.1, 0.5, 2.0, 4.0}) {
    const auto c = random_soft(8, 8, rng);
    auto f = form(FBetaVariant::literal, beta);
    f.epsilon = 1e-300;
    auto d = form(FBetaVariant::standard, 1.0);
    d.epsilon = 1e-300;
    const double scale = (1 + beta * beta) / (2 * beta * beta);
    EXPECT_NEAR(fbeta_measure(c.y, c.yhat, f), scale * fbeta_measure(c.y, c.yhat, d), 1e-12);
  }
  EXPECT_DOUBLE_EQ((1 + 0.01) / (2 * 0.01), 50.5);
}

TEST(FBeta, BetaOneBothFormsEqualDice) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto c = random_soft(8, 8, rng);
    double inter = 0, s = 0, sh = 0;
    for (std::size_t i = 0; i < c.y.size(); ++i) {
      inter += c.y[i] * c.yhat[i];
      s += c.y[i];
      sh += c.yhat[i];
    }
    const double dice = (2 * inter + 1) / (s + sh + 1);
    EXPECT_NEAR(fbeta_measure(c.y, c.yhat, form(FBetaVariant::standard, 1.0)), dice, 1e-12);
    EXPECT_NEAR(fbeta_measure(c.y, c.yhat, form(FBetaVariant::literal, 1.0)), dice, 1e-12);
  }
}

TEST(FBeta, GradientIsNonPositiveForEmptyTruth) {
  std::mt19937_64 rng(4);
  auto c = random_soft(8, 8, rng);
  c.y = BinaryMask(8, 8);
  const auto f = form(FBetaVariant::standard, 0.7);
  const auto parts = fbeta_parts(c.y, c.yhat, f);
  const auto g = fbeta_grad(c.y, c.yhat, f);
  const double expected = -parts.numerator / (parts.denominator * parts.denominator);
  for (double v : g) {
    EXPECT_LE(v, 0.0);
    EXPECT_NEAR(v, expected, 1e-15);
  }
}

TEST(FBeta, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (auto variant : {FBetaVariant::standard, FBetaVariant::literal})
    for (double beta : {0.1, 0.5, 1.0, 4.0}) {
      auto c = random_soft(8, 8, rng);
      const auto f = form(variant, beta);
      const auto g = fbeta_grad(c.y, c.yhat, f);
      for (std::size_t k = 0; k < c.yhat.size(); ++k) {
        const double num =
            oracle::central_difference([&] { return fbeta_measure(c.y, c.yhat, f); }, c.yhat[k], 1e-6);
        ASSERT_LT(oracle::rel_error(g[k], num), 1e-6) << "beta " << beta << " k " << k;
      }
    }
}

TEST(FBeta, BetaOneGradientsMatchAcrossForms) {
  std::mt19937_64 rng(6);
  const auto c = random_soft(8, 8, rng);
  const auto a = fbeta_grad(c.y, c.yhat, form(FBetaVariant::standard, 1.0));
  const auto b = fbeta_grad(c.y, c.yhat, form(FBetaVariant::literal, 1.0));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(FBeta, FormValidation) {
  EXPECT_THROW(form(FBetaVariant::standard, 0.0).validate(), std::invalid_argument);
  auto f = form(FBetaVariant::standard, 1.0);
  f.epsilon = -1.0;
  EXPECT_THROW(f.validate(), std::invalid_argument);
}

TEST(Prediction, SoftmaxOfLogits) {
  const std::vector<double> bg{0.0, 1.0}, fg{0.0, -1.0};
  const auto p = Prediction::from_logits(2, 1, bg, fg);
  EXPECT_DOUBLE_EQ(p.building()[0], 0.5);
  EXPECT_NEAR(p.building()[1], 1.0 / (1.0 + std::exp(2.0)), 1e-15);
  EXPECT_NEAR(p.building()[1] + p.background()[1], 1.0, 1e-15);
}

TEST(Prediction, RejectsOutOfRangeProbabilities) {
  const std::vector<double> bad{1.5};
  EXPECT_THROW(Prediction::from_probabilities(1, 1, bad), std::invalid_argument);
}

TEST(WeightedCrossEntropy, PerfectPixelIsZero) {
  BinaryMask y(1, 1, 1);
  const std::vector<double> prob{1.0};
  const auto pred = Prediction::from_probabilities(1, 1, prob);
  EXPECT_NEAR(weighted_cross_entropy(y, pred, WeightMap(1, 1, 5.0)), 0.0, 1e-6);
}

TEST(WeightedCrossEntropy, HalfProbabilityWeightTwo) {
  BinaryMask y(1, 1, 1);
  const std::vector<double> prob{0.5};
  const auto pred = Prediction::from_probabilities(1, 1, prob);
  EXPECT_NEAR(weighted_cross_entropy(y, pred, WeightMap(1, 1, 2.0)), 2.0 * std::log(2.0), 1e-12);
}

TEST(WeightedCrossEntropy, UnitWeightsMatchPlainBce) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const auto y = oracle::random_mask(9, 7, 0.3, rng);
    const auto bg = random_logits(y.size(), rng), fg = random_logits(y.size(), rng);
    const auto pred = Prediction::from_logits(9, 7, bg, fg);
    EXPECT_NEAR(weighted_cross_entropy(y, pred, WeightMap(9, 7, 1.0)), bce_oracle(y, bg, fg), 1e-9);
  }
}

TEST(WeightedCrossEntropy, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  const auto y = oracle::random_mask(8, 8, 0.4, rng);
  auto bg = random_logits(64, rng), fg = random_logits(64, rng);
  WeightMap w(8, 8);
  std::uniform_real_distribution<double> u(1.0, 7.0);
  for (auto& v : w.values()) v = u(rng);
  const auto f = [&] { return weighted_cross_entropy(y, Prediction::from_logits(8, 8, bg, fg), w); };
  const auto g = wce_grad(y, Prediction::from_logits(8, 8, bg, fg), w);
  for (std::size_t k = 0; k < 64; ++k) {
    ASSERT_LT(oracle::rel_error(g.building[k], oracle::central_difference(f, fg[k], 1e-5)), 1e-6);
    ASSERT_LT(oracle::rel_error(g.background[k], oracle::central_difference(f, bg[k], 1e-5)), 1e-6);
  }
}

TEST(WeightedCrossEntropy, GradientNearZeroWhenConfidentAndRight) {
  BinaryMask y(2, 1);
  y[0] = 1;
  const std::vector<double> bg{-20.0, 20.0}, fg{20.0, -20.0};
  const auto g = wce_grad(y, Prediction::from_logits(2, 1, bg, fg), WeightMap(2, 1, 3.0));
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(g.building[k], 0.0, 1e-6);
    EXPECT_NEAR(g.background[k], 0.0, 1e-6);
  }
}

TEST(WeightedCrossEntropy, GradientIsLinearInWeights) {
  std::mt19937_64 rng(9);
  const auto y = oracle::random_mask(5, 5, 0.5, rng);
  const auto pred = Prediction::from_logits(5, 5, random_logits(25, rng), random_logits(25, rng));
  WeightMap w(5, 5), w2(5, 5);
  std::uniform_real_distribution<double> u(1.0, 7.0);
  for (std::size_t i = 0; i < 25; ++i) {
    w[i] = u(rng);
    w2[i] = 2.0 * w[i];
  }
  const auto a = wce_grad(y, pred, w), b = wce_grad(y, pred, w2);
  for (std::size_t k = 0; k < 25; ++k) {
    EXPECT_EQ(b.building[k], 2.0 * a.building[k]);
    EXPECT_EQ(b.background[k], 2.0 * a.background[k]);
  }
}

TEST(CombinedObjective, PerfectPredictionNearZero) {
  BinaryMask y(4, 4);
  y(1, 1) = y(2, 1) = 1;
  std::vector<double> bg(16), fg(16);
  for (std::size_t i = 0; i < 16; ++i) {
    fg[i] = y[i] ? 30.0 : -30.0;
    bg[i] = -fg[i];
  }
  const auto t = combined_objective(y, Prediction::from_logits(4, 4, bg, fg), nullptr, FBetaForm{});
  EXPECT_NEAR(t.total, 0.0, 1e-6);
}

TEST(CombinedObjective, TotalIsSumOfParts) {
  std::mt19937_64 rng(10);
  const auto y = oracle::random_mask(8, 8, 0.4, rng);
  const auto pred = Prediction::from_logits(8, 8, random_logits(64, rng), random_logits(64, rng));
  WeightMap w(8, 8, 2.5);
  const auto f = form(FBetaVariant::standard, 0.5);
  const auto t = combined_objective(y, pred, &w, f);
  const double wce = weighted_cross_entropy(y, pred, w);
  const double fb = fbeta_measure(y, pred.building(), f);
  EXPECT_DOUBLE_EQ(t.wce, wce);
  EXPECT_DOUBLE_EQ(t.fbeta, fb);
  EXPECT_DOUBLE_EQ(t.total, wce + (1.0 - fb));
}

TEST(CombinedObjective, GradientIsSumOfPartGradients) {
  std::mt19937_64 rng(11);
  const auto y = oracle::random_mask(8, 8, 0.4, rng);
  auto bg = random_logits(64, rng), fg = random_logits(64, rng);
  WeightMap w(8, 8, 1.7);
  const auto f = form(FBetaVariant::standard, 0.1);
  LogitGrad g;
  combined_objective(y, Prediction::from_logits(8, 8, bg, fg), &w, f);
  ObjectiveSpec spec;
  spec.form = f;
  evaluate_objective(y, Prediction::from_logits(8, 8, bg, fg), &w, spec, &g);

  ObjectiveSpec ce_only = spec;
  ce_only.fbeta = false;
  ObjectiveSpec fb_only = spec;
  fb_only.cross_entropy = false;
  LogitGrad a, b;
  evaluate_objective(y, Prediction::from_logits(8, 8, bg, fg), &w, ce_only, &a);
  evaluate_objective(y, Prediction::from_logits(8, 8, bg, fg), &w, fb_only, &b);
  for (std::size_t k = 0; k < 64; ++k) {
    EXPECT_NEAR(g.building[k], a.building[k] + b.building[k], 1e-15);
    EXPECT_NEAR(g.background[k], a.background[k] + b.background[k], 1e-15);
  }

  const auto total = [&] {
    return evaluate_objective(y, Prediction::from_logits(8, 8, bg, fg), &w, spec).total;
  };
  for (std::size_t k = 0; k < 64; ++k) {
    ASSERT_LT(oracle::rel_error(g.building[k], oracle::central_difference(total, fg[k], 1e-5)), 1e-6);
    ASSERT_LT(oracle::rel_error(g.background[k], oracle::central_difference(total, bg[k], 1e-5)), 1e-6);
  }
}

TEST(CombinedObjective, MissingWeightsMeansUnitWeights) {
  std::mt19937_64 rng(12);
  const auto y = oracle::random_mask(6, 6, 0.4, rng);
  const auto pred = Prediction::from_logits(6, 6, random_logits(36, rng), random_logits(36, rng));
  const WeightMap ones(6, 6, 1.0);
  EXPECT_EQ(combined_objective(y, pred, nullptr, FBetaForm{}).total,
            combined_objective(y, pred, &ones, FBetaForm{}).total);
}
