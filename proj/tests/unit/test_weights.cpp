#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "footseg/components.hpp"
#include "footseg/distance.hpp"
#include "footseg/weights.hpp"
#include "oracles.hpp"

using namespace footseg;

namespace {

LabelMap two_pixel_map(int w, int h, int x1, int y1, int x2, int y2) {
  Grid<std::int32_t> g(w, h);
  g(x1, y1) = 1;
  g(x2, y2) = 2;
  return LabelMap(g, 2);
}

}  // namespace

TEST(ClassBalance, UniformIsAllOnes) {
  std::mt19937_64 rng(1);
  const auto m = oracle::random_mask(7, 5, 0.4, rng);
  const auto w = class_balance_map(m, ClassBalance::uniform);
  for (double v : w.values()) EXPECT_EQ(v, 1.0);
}

TEST(ClassBalance, InverseFrequencyFromCounts) {
  BinaryMask m(4, 4);
  for (int x = 0; x < 4; ++x) m(x, 0) = 1;
  const auto w = class_balance_map(m, ClassBalance::inverse_frequency);
  EXPECT_DOUBLE_EQ(w(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(w(0, 1), 16.0 / 24.0);
}

TEST(ClassBalance, AbsentClassGetsUpperClamp) {
  const BinaryMask m(4, 4);
  const auto w = class_balance_map(m, ClassBalance::inverse_frequency);
  EXPECT_DOUBLE_EQ(w(0, 0), 0.5);
  BinaryMask full(4, 4, 1);
  EXPECT_DOUBLE_EQ(class_balance_map(full, ClassBalance::inverse_frequency)(1, 1), 0.5);
}

TEST(ClassBalance, ClampsRareClass) {
  BinaryMask m(100, 100);
  m(0, 0) = 1;
  const auto w = class_balance_map(m, ClassBalance::inverse_frequency);
  EXPECT_DOUBLE_EQ(w(0, 0), kClassWeightMax);
}

TEST(WeightParams, TheoreticalMaxAddsBoundaryEmphasis) {
  WeightParams p;
  EXPECT_DOUBLE_EQ(p.theoretical_max(), 11.0);
  p.class_balance = ClassBalance::inverse_frequency;
  EXPECT_DOUBLE_EQ(p.theoretical_max(), 20.0);
}

TEST(WeightParams, ValidateRejectsBadValues) {
  WeightParams p;
  p.sigma = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = WeightParams{};
  p.w0 = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(BoundaryMap, PeakOnTouchingPixel) {
  // Pixels at the two instances themselves have d1 = 0; a pixel with
  // d1 = d2 = 0 is constructed directly.
  const BinaryMask mask(1, 1);
  DistanceField f{Grid<double>(1, 1, 0.0), Grid<double>(1, 1, 0.0)};
  Grid<std::int32_t> g(1, 1);
  const auto w = unet_weight_map(mask, LabelMap(g, 0), f, WeightParams{});
  EXPECT_DOUBLE_EQ(w(0, 0), 11.0);
}

TEST(BoundaryMap, ThreeFourDistances) {
  const BinaryMask mask(1, 1);
  DistanceField f{Grid<double>(1, 1, 3.0), Grid<double>(1, 1, 4.0)};
  const auto w = unet_weight_map(mask, LabelMap(Grid<std::int32_t>(1, 1), 0), f, WeightParams{});
  EXPECT_NEAR(w(0, 0), 1.0 + 10.0 * std::exp(-49.0 / 112.5), 1e-12);
  // Exact value is 7.46905; the rounded figure 7.467 is 2e-3 low.
  EXPECT_NEAR(w(0, 0), 7.46905, 1e-5);
}

TEST(BoundaryMap, SingleComponentKeepsClassWeight) {
  Grid<std::int32_t> g(6, 6);
  g(2, 2) = 1;
  const auto w = compute_weight_maps(LabelMap(g, 1), WeightParams{});
  for (double v : w.boundary.values()) EXPECT_EQ(v, 1.0);
  for (double v : w.exponentiated.values()) EXPECT_DOUBLE_EQ(v, std::exp(2.0 / 11.0));
}

TEST(BoundaryMap, GapPixelBetweenTwoInstances) {
  const LabelMap lm = two_pixel_map(5, 1, 0, 0, 4, 0);
  const auto w = compute_weight_maps(lm, WeightParams{});
  EXPECT_NEAR(w.boundary(2, 0), 1.0 + 10.0 * std::exp(-16.0 / 112.5), 1e-12);
}

TEST(ExpMap, Endpoints) {
  WeightParams p;
  const double top = p.theoretical_max();
  Grid<double> w(3, 1, std::vector<double>{0.0, top, 7.467});
  const auto e = exp_weight_map(w, p);
  EXPECT_DOUBLE_EQ(e[0], 1.0);
  EXPECT_NEAR(e[1], std::exp(2.0), 1e-12);
  EXPECT_NEAR(e[2], std::exp(2.0 * 7.467 / 11.0), 1e-12);
  EXPECT_NEAR(e[2], 3.887, 5e-4);
}

TEST(ExpMap, RangeOnRandomMasks) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    WeightParams p;
    p.class_balance = trial % 2 ? ClassBalance::inverse_frequency : ClassBalance::uniform;
    const LabelMap lm = connected_components(oracle::random_mask(24, 24, 0.15, rng));
    const auto w = compute_weight_maps(lm, p);
    for (double v : w.exponentiated.values()) {
      ASSERT_GE(v, 1.0);
      ASSERT_LE(v, std::exp(p.p) * (1 + 1e-12));
    }
  }
}

TEST(ExpMap, MonotoneInBoundaryWeight) {
  WeightParams p;
  Grid<double> w(50, 1);
  for (int i = 0; i < 50; ++i) w[static_cast<std::size_t>(i)] = i * 0.2;
  const auto e = exp_weight_map(w, p);
  for (std::size_t i = 1; i < 50; ++i) EXPECT_GT(e[i], e[i - 1]);
}
