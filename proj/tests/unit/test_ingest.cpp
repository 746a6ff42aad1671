#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "footseg/components.hpp"
#include "footseg/ingest/dataset.hpp"
#include "footseg/ingest/polygon.hpp"
#include "footseg/ingest/rle.hpp"
#include "footseg/ingest/tiling.hpp"
#include "footseg/io.hpp"
#include "oracles.hpp"

using namespace footseg;
namespace fs = std::filesystem;

namespace {

PolygonAnnotation rect(double x0, double y0, double x1, double y1) {
  return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, {}};
}

Sample blank_sample(int w, int h, const std::string& id) {
  Sample s;
  s.id = id;
  s.dataset = "d";
  s.image = Image(w, h, 3, 0.25f);
  Grid<std::int32_t> g(w, h);
  g(0, 0) = 1;
  s.labels = LabelMap(g, 1);
  return s;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("footseg_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Rasterize, AxisAlignedRectangleCoversCentersInside) {
  const auto r = rasterize_polygons({rect(0.5, 0.5, 3.5, 2.5)}, 8, 8);
  // Centers (x + 0.5, y + 0.5) inside [0.5, 3.5] x [0.5, 2.5]: x in {0..2}, y in {0..1}.
  BinaryMask want(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      want(x, y) = oracle::inside_ring(x + 0.5, y + 0.5, {{0.5, 0.5}, {3.5, 0.5}, {3.5, 2.5}, {0.5, 2.5}});
  EXPECT_EQ(r.mask, want);
  EXPECT_EQ(r.mask.foreground_count(), 6u);
}

TEST(Rasterize, ZeroAreaPolygonIsEmpty) {
  const auto r = rasterize_polygons({{{{1, 1}, {5, 1}, {3, 1}}, {}}}, 8, 8);
  EXPECT_EQ(r.mask.foreground_count(), 0u);
  EXPECT_EQ(r.labels.component_count(), 0);
}

TEST(Rasterize, TooFewVerticesThrows) {
  EXPECT_THROW(rasterize_polygons({{{{1, 1}, {5, 1}}, {}}}, 8, 8), std::invalid_argument);
}

TEST(Rasterize, DisjointRectanglesAreSeparateInstances) {
  const auto r = rasterize_polygons({rect(1, 1, 4, 4), rect(6, 2, 9, 7)}, 12, 10);
  EXPECT_EQ(r.labels.component_count(), 2);
  EXPECT_EQ(connected_components(r.mask).component_count(), 2);
  EXPECT_EQ(r.labels.to_mask(), r.mask);
}

TEST(Rasterize, MatchesPointInPolygonOnRandomPolygons) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 26.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::pair<double, double>> ring;
    PolygonAnnotation poly;
    for (int i = 0; i < 3 + t % 5; ++i) {
      // Offsets of 1/3 keep vertices and edges off pixel centers.
      const double x = std::floor(u(rng)) + 1.0 / 3.0, y = std::floor(u(rng)) + 1.0 / 3.0;
      ring.push_back({x, y});
      poly.exterior.push_back({x, y});
    }
    const auto r = rasterize_polygons({poly}, 24, 24);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x) ASSERT_EQ(r.mask(x, y), oracle::inside_ring(x + 0.5, y + 0.5, ring) ? 1 : 0);
  }
}

TEST(Rasterize, HolesAreExcluded) {
  PolygonAnnotation p = rect(0, 0, 10, 10);
  p.holes.push_back({{3, 3}, {7, 3}, {7, 7}, {3, 7}});
  const auto r = rasterize_polygons({p}, 10, 10);
  EXPECT_EQ(r.mask(5, 5), 0);
  EXPECT_EQ(r.mask(1, 1), 1);
  EXPECT_EQ(r.mask.foreground_count(), 100u - 16u);
}

TEST(Rle, AllBackgroundAndAllForeground) {
  EXPECT_EQ(decode_rle({3, 4, {12}}), BinaryMask(4, 3));
  EXPECT_EQ(decode_rle({3, 4, {0, 12}}), BinaryMask(4, 3, 1));
  EXPECT_EQ(encode_rle(BinaryMask(4, 3)).counts, (std::vector<std::uint32_t>{12}));
  EXPECT_EQ(encode_rle(BinaryMask(4, 3, 1)).counts, (std::vector<std::uint32_t>{0, 12}));
}

TEST(Rle, ColumnMajorRuns) {
  BinaryMask m(2, 2);
  m(1, 0) = 1;
  EXPECT_EQ(encode_rle(m).counts, (std::vector<std::uint32_t>{2, 1, 1}));
}

TEST(Rle, BadCountsThrow) {
  EXPECT_THROW(decode_rle({2, 2, {3}}), std::invalid_argument);
}

TEST(Rle, RandomRoundTripIncludingJson) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(1, 30);
  for (int t = 0; t < 100; ++t) {
    const auto m = oracle::random_mask(size(rng), size(rng), 0.5, rng);
    const auto rle = encode_rle(m);
    ASSERT_EQ(decode_rle(rle), m);
    ASSERT_EQ(rle_from_json(rle_to_json(rle)), rle);
  }
}

TEST(Tiling, PaperScaleSixteenTiles) {
  Grid<std::uint8_t> big(2048, 2048);
  std::mt19937_64 rng(6);
  for (auto& v : big.values()) v = static_cast<std::uint8_t>(rng());
  const auto tiles = tile(big, 4);
  ASSERT_EQ(tiles.size(), 16u);
  for (const auto& t : tiles) EXPECT_TRUE(t.same_shape(512, 512));
  EXPECT_EQ(tiles[5](0, 0), big(512, 512));
  EXPECT_EQ(stitch(tiles, 4), big);
}

TEST(Tiling, FactorOneIsIdentity) {
  std::mt19937_64 rng(7);
  const auto m = oracle::random_mask(10, 6, 0.5, rng);
  const auto t = tile(m, 1);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0], m);
}

TEST(Tiling, ImageRoundTrip) {
  std::mt19937_64 rng(8);
  Image img(64, 64, 3);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& v : img.values()) v = u(rng);
  EXPECT_EQ(stitch(tile(img, 2), 2), img);
}

TEST(Tiling, IndivisibleThrows) {
  EXPECT_THROW(tile(BinaryMask(10, 10), 3), std::invalid_argument);
  EXPECT_THROW(tile(BinaryMask(10, 10), 0), std::invalid_argument);
}

TEST(Tiling, LabelTilesAreRecompacted) {
  Grid<std::int32_t> g(4, 4);
  g(3, 3) = 7;
  const auto tiles = tile(LabelMap::compact(g), 2);
  EXPECT_EQ(tiles[3](1, 1), 1);
  EXPECT_EQ(tiles[0].component_count(), 0);
}

TEST(Resize, IdentityIsBitExact) {
  std::mt19937_64 rng(9);
  Image img(13, 7, 3);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& v : img.values()) v = u(rng);
  EXPECT_EQ(resize(img, 13, 7), img);
  EXPECT_EQ(resize(img, 13, 7, ResizeMode::nearest), img);
}

TEST(Resize, ConstantStaysConstant) {
  const Image img(9, 5, 2, 0.375f);
  for (auto [w, h] : {std::pair{3, 3}, {20, 11}, {1, 1}}) {
    const Image out = resize(img, w, h);
    for (float v : out.values()) EXPECT_FLOAT_EQ(v, 0.375f);
  }
}

TEST(Resize, NearestKeepsSourceClasses) {
  BinaryMask checker(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) checker(x, y) = static_cast<std::uint8_t>((x + y) % 2);
  const auto small = resize_nearest(checker, 2, 2);
  // Half-pixel centers: output (i, j) samples source (2i + 1, 2j + 1).
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) EXPECT_EQ(small(x, y), checker(2 * x + 1, 2 * y + 1));
  EXPECT_THROW(resize_nearest(checker, 0, 2), std::invalid_argument);
}

TEST(Split, HundredIds) {
  std::vector<std::string> ids;
  for (int i = 0; i < 100; ++i) ids.push_back("id" + std::to_string(i));
  const auto s = split_dataset(ids, {42});
  EXPECT_EQ(s.test.size(), 20u);
  EXPECT_EQ(s.train.size(), 64u);
  EXPECT_EQ(s.val.size(), 16u);
  std::set<std::string> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 100u);
}

TEST(Split, DeterministicPerSeed) {
  const auto a = split_indices(57, {3}), b = split_indices(57, {3}), c = split_indices(57, {4});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.test, c.test);
}

TEST(Split, SingleIdGoesToTest) {
  const auto s = split_dataset({"only"}, {0});
  EXPECT_EQ(s.test, std::vector<std::string>{"only"});
  EXPECT_TRUE(s.train.empty());
  EXPECT_TRUE(s.val.empty());
  EXPECT_THROW(split_dataset({}, {0}), std::invalid_argument);
}

TEST(Subsample, TenPercentOfHundred) {
  const auto a = subsample_indices(100, 0.1, 5);
  EXPECT_EQ(a.size(), 10u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(a, subsample_indices(100, 0.1, 5));
  EXPECT_EQ(subsample_indices(3, 0.01, 5).size(), 1u);
  EXPECT_THROW(subsample_indices(10, 0.0, 5), std::invalid_argument);
  EXPECT_THROW(subsample_indices(10, 1.5, 5), std::invalid_argument);
}

TEST(CrossDataset, LargeSampleIsResizedThenTiled) {
  const auto out = prepare_for_target(blank_sample(2048, 2048, "big"), 256);
  ASSERT_EQ(out.size(), 4u);
  for (const auto& s : out) {
    EXPECT_EQ(s.image.width(), 256);
    EXPECT_EQ(s.labels.height(), 256);
  }
}

TEST(CrossDataset, SmallSamplesTileOnlyAtTwiceTheTarget) {
  EXPECT_EQ(prepare_for_target(blank_sample(16, 16, "s"), 8).size(), 4u);
  EXPECT_EQ(prepare_for_target(blank_sample(16, 15, "s"), 8).size(), 1u);
}

TEST(CrossDataset, SmallSampleIsResizedOnce) {
  const auto out = prepare_for_target(blank_sample(300, 300, "small"), 256);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].image.width(), 256);
}

TEST(CrossDataset, FractionsAndShuffleAreDeterministic) {
  DatasetPart a, b;
  for (int i = 0; i < 100; ++i) a.samples.push_back(blank_sample(16, 16, "a" + std::to_string(i)));
  for (int i = 0; i < 20; ++i) b.samples.push_back(blank_sample(16, 16, "b" + std::to_string(i)));
  a.fraction = 0.1;
  const auto x = build_cross_dataset({a, b}, {12, 1});
  const auto y = build_cross_dataset({a, b}, {12, 1});
  ASSERT_EQ(x.size(), 30u);
  int from_a = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x[i].id, y[i].id);
    from_a += x[i].id[0] == 'a';
    EXPECT_EQ(x[i].image.width(), 12);
  }
  EXPECT_EQ(from_a, 10);
}

TEST(Manifest, WriteReadRoundTrip) {
  const auto dir = temp_dir("manifest");
  const std::vector<ManifestRecord> recs{{"images/a.png", "ann/a.json", "x"}, {"/abs/b.png", "b.png", "y"}};
  write_manifest(dir / "m.ndjson", recs);
  EXPECT_EQ(read_manifest(dir / "m.ndjson"), recs);
}

TEST(Manifest, LoadsPolygonAndLabelAnnotations) {
  const auto dir = temp_dir("load");
  io::write_image(dir / "img.png", Image(8, 8, 3, 0.5f));
  AnnotationSet set{8, 8, {rect(1, 1, 4, 4)}};
  write_annotations(dir / "a.json", set);
  Grid<std::int32_t> g(8, 8);
  g(6, 6) = 1;
  io::write_labels(dir / "l.png", LabelMap(g, 1));
  write_manifest(dir / "m.ndjson", {{"img.png", "a.json", "d"}, {"img.png", "l.png", "d"}});
  const auto samples = load_manifest(dir / "m.ndjson");
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[0].labels.to_mask().foreground_count(), 9u);
  EXPECT_EQ(samples[1].labels(6, 6), 1);
}

TEST(Annotations, JsonRoundTrip) {
  AnnotationSet set{20, 10, {rect(1, 1, 4, 4), rect(5.25, 2, 9, 7.5)}};
  set.buildings[1].holes.push_back({{6, 3}, {7, 3}, {7, 4}});
  const auto back = annotations_from_json(annotations_to_json(set));
  EXPECT_EQ(back.width, 20);
  EXPECT_EQ(back.height, 10);
  EXPECT_EQ(back.buildings, set.buildings);
}
