#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "footseg/components.hpp"
#include "footseg/distance.hpp"
#include "footseg/raster.hpp"
#include "oracles.hpp"

using namespace footseg;

TEST(Grid, RejectsNonPositiveDimensions) {
  EXPECT_THROW(Grid<int>(0, 3), std::invalid_argument);
  EXPECT_THROW(Grid<int>(3, -1), std::invalid_argument);
  EXPECT_THROW(Grid<int>(2, 2, std::vector<int>{1, 2, 3}), std::invalid_argument);
}

TEST(Grid, RowMajorIndexing) {
  Grid<int> g(3, 2);
  g(2, 1) = 7;
  EXPECT_EQ(g[5], 7);
}

TEST(BinaryMask, ValidateRejectsNonBinaryValues) {
  BinaryMask m(2, 2);
  m[3] = 2;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m[3] = 1;
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.foreground_count(), 1u);
}

TEST(LabelMap, CompactRenumbersInScanOrder) {
  Grid<std::int32_t> raw(4, 1, std::vector<std::int32_t>{9, 0, 3, 9});
  const LabelMap lm = LabelMap::compact(raw);
  EXPECT_EQ(lm.component_count(), 2);
  EXPECT_EQ(lm(0, 0), 1);
  EXPECT_EQ(lm(2, 0), 2);
  EXPECT_EQ(lm(3, 0), 1);
  EXPECT_EQ(lm.to_mask()[1], 0);
}

TEST(Components, EmptyMaskHasNoComponents) {
  EXPECT_EQ(connected_components(BinaryMask(4, 4)).component_count(), 0);
}

TEST(Components, DiagonalTouchDependsOnConnectivity) {
  BinaryMask m(3, 3);
  m(0, 0) = 1;
  m(1, 1) = 1;
  EXPECT_EQ(connected_components(m, Connectivity::eight).component_count(), 1);
  EXPECT_EQ(connected_components(m, Connectivity::four).component_count(), 2);
}

TEST(Components, SeparatedPixelsInOneColumnAreDistinct) {
  BinaryMask m(1, 3);
  m(0, 0) = 1;
  m(0, 2) = 1;
  EXPECT_EQ(connected_components(m, Connectivity::eight).component_count(), 2);
}

// Labels must match the flood fill up to a bijection between ids.
TEST(Components, MatchesFloodFillOnRandomMasks) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const BinaryMask m = oracle::random_mask(16, 16, 0.2 + 0.4 * (trial % 3) / 2.0, rng);
    for (bool eight : {false, true}) {
      int expected = 0;
      const auto ref = oracle::flood_fill(m, eight, &expected);
      const LabelMap got = connected_components(m, eight ? Connectivity::eight : Connectivity::four);
      ASSERT_EQ(got.component_count(), expected);
      std::map<int, int> fwd, back;
      for (std::size_t i = 0; i < m.size(); ++i) {
        ASSERT_EQ(ref[i] == 0, got[i] == 0);
        if (!ref[i]) continue;
        auto [f, fnew] = fwd.emplace(ref[i], got[i]);
        auto [b, bnew] = back.emplace(got[i], ref[i]);
        ASSERT_EQ(f->second, got[i]);
        ASSERT_EQ(b->second, ref[i]);
      }
    }
  }
}

TEST(Components, LabelsFollowScanOrder) {
  std::mt19937_64 rng(3);
  const LabelMap lm = connected_components(oracle::random_mask(20, 20, 0.3, rng));
  int seen = 0;
  for (std::size_t i = 0; i < 400; ++i)
    if (lm[i] > seen) {
      ASSERT_EQ(lm[i], seen + 1);
      seen = lm[i];
    }
  EXPECT_EQ(seen, lm.component_count());
}

TEST(Distance, PythagoreanFromSingleSeed) {
  Grid<std::int32_t> g(6, 6);
  g(0, 0) = 1;
  const auto d = distance_transform(LabelMap(g, 1), 1);
  EXPECT_EQ(d(3, 4), 5.0);
  EXPECT_EQ(d(0, 0), 0.0);
}

TEST(Distance, UnknownComponentThrows) {
  Grid<std::int32_t> g(2, 2);
  g(0, 0) = 1;
  EXPECT_THROW(distance_transform(LabelMap(g, 1), 2), std::out_of_range);
  EXPECT_THROW(distance_transform(LabelMap(g, 1), 0), std::out_of_range);
}

TEST(Distance, SymmetricPairGivesEqualD1D2) {
  Grid<std::int32_t> g(1, 5);
  g(0, 0) = 1;
  g(0, 4) = 2;
  const auto f = two_nearest_distances(LabelMap(g, 2));
  EXPECT_EQ(f.d1(0, 2), 2.0);
  EXPECT_EQ(f.d2(0, 2), 2.0);
}

TEST(Distance, SingleComponentLeavesD2Infinite) {
  Grid<std::int32_t> g(5, 5);
  g(2, 2) = 1;
  const auto f = two_nearest_distances(LabelMap(g, 1));
  for (std::size_t i = 0; i < 25; ++i) EXPECT_TRUE(std::isinf(f.d2[i]));
}

TEST(Distance, TransformIsExactAgainstAllPairs) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(1, 40);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = size(rng), h = size(rng);
    const LabelMap lm = connected_components(oracle::random_mask(w, h, 0.05, rng));
    for (int k = 1; k <= std::min(lm.component_count(), 3); ++k) {
      const auto got = distance_transform(lm, k);
      const auto want = oracle::brute_distance(lm.grid(), k);
      for (std::size_t i = 0; i < want.size(); ++i) ASSERT_EQ(got[i], want[i]);
    }
  }
}

TEST(Distance, TwoNearestMatchesPerComponentOracle) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const LabelMap lm = connected_components(oracle::random_mask(32, 32, 0.04, rng));
    const auto f = two_nearest_distances(lm);
    std::vector<std::vector<double>> per;
    for (int k = 1; k <= lm.component_count(); ++k) per.push_back(oracle::brute_distance(lm.grid(), k));
    for (std::size_t i = 0; i < lm.grid().size(); ++i) {
      std::vector<double> v;
      for (const auto& p : per) v.push_back(p[i]);
      v.push_back(INFINITY);
      v.push_back(INFINITY);
      std::sort(v.begin(), v.end());
      ASSERT_EQ(f.d1[i], v[0]);
      ASSERT_EQ(f.d2[i], v[1]);
    }
  }
}
