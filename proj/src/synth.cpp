#include "footseg/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace footseg {
namespace {

std::mt19937_64 scene_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

PolygonAnnotation rectangle(double x0, double y0, double w, double h) {
  return {{{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}}, {}};
}

PolygonAnnotation rotated_rectangle(double cx, double cy, double w, double h, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  PolygonAnnotation poly;
  for (auto [u, v] : {std::pair{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}) {
    const double dx = u * w;
    const double dy = v * h;
    poly.exterior.push_back({cx + c * dx - s * dy, cy + s * dx + c * dy});
  }
  return poly;
}

struct Box {
  int x0, y0, w, h;
};

// Proposes a box touching `anchor` on a random side at the given gap, with
// at least one row/column of overlap along that side.
Box adjacent_box(std::mt19937_64& rng, const Box& anchor, int w, int h, int gap) {
  const int side = uniform_int(rng, 0, 3);
  Box b{0, 0, w, h};
  if (side < 2) {
    b.x0 = side == 0 ? anchor.x0 + anchor.w + gap : anchor.x0 - gap - w;
    b.y0 = uniform_int(rng, anchor.y0 - h + 1, anchor.y0 + anchor.h - 1);
  } else {
    b.y0 = side == 2 ? anchor.y0 + anchor.h + gap : anchor.y0 - gap - h;
    b.x0 = uniform_int(rng, anchor.x0 - w + 1, anchor.x0 + anchor.w - 1);
  }
  return b;
}

}  // namespace

void SceneConfig::validate() const {
  if (width <= 0 || height <= 0 || channels <= 0) throw std::invalid_argument("scene dimensions must be positive");
  if (min_buildings < 0 || max_buildings < min_buildings) throw std::invalid_argument("invalid building count range");
  if (min_size < 1 || max_size < min_size) throw std::invalid_argument("invalid building size range");
  if (max_size > std::min(width, height)) throw std::invalid_argument("building size exceeds image");
  if (min_gap < 0) throw std::invalid_argument("min_gap must be >= 0");
  if (noise_std < 0.0f || building_jitter < 0.0f) throw std::invalid_argument("noise parameters must be >= 0");
  if (adjacency < 0.0 || adjacency > 1.0) throw std::invalid_argument("adjacency must be in [0, 1]");
}

Scene generate_scene(const SceneConfig& cfg, std::uint64_t index) {
  cfg.validate();
  std::mt19937_64 rng = scene_rng(cfg.seed, index);
  const int W = cfg.width;
  const int H = cfg.height;

  Scene scene;
  scene.requested_buildings = uniform_int(rng, cfg.min_buildings, cfg.max_buildings);
  scene.annotations.width = W;
  scene.annotations.height = H;

  Grid<std::int32_t> occupancy(W, H, 0);
  std::vector<Box> boxes;
  std::vector<std::uint8_t> candidate(static_cast<std::size_t>(W) * H);

  for (int b = 0; b < scene.requested_buildings; ++b) {
    bool placed = false;
    for (int attempt = 0; attempt < cfg.max_attempts && !placed; ++attempt) {
      const int w = uniform_int(rng, cfg.min_size, cfg.max_size);
      const int h = uniform_int(rng, cfg.min_size, cfg.max_size);
      PolygonAnnotation poly;
      Box box{0, 0, w, h};
      if (cfg.rotated) {
        const double angle = uniform_real(rng, 0.0, std::numbers::pi / 2.0);
        const double half = 0.5 * std::hypot(w, h);
        if (2.0 * half >= std::min(W, H)) continue;
        const double cx = uniform_real(rng, half, W - half);
        const double cy = uniform_real(rng, half, H - half);
        poly = rotated_rectangle(cx, cy, w, h, angle);
      } else {
        const bool snap = !boxes.empty() && uniform_real(rng, 0.0, 1.0) < cfg.adjacency;
        if (snap) {
          const Box& anchor = boxes[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(boxes.size()) - 1))];
          box = adjacent_box(rng, anchor, w, h, cfg.min_gap + uniform_int(rng, 0, 1));
        } else {
          box.x0 = uniform_int(rng, 0, W - w);
          box.y0 = uniform_int(rng, 0, H - h);
        }
        if (box.x0 < 0 || box.y0 < 0 || box.x0 + w > W || box.y0 + h > H) continue;
        poly = rectangle(box.x0, box.y0, w, h);
      }

      const Rasterized r = rasterize_polygons({poly}, W, H);
      if (r.labels.component_count() == 0) continue;
      bool clear = true;
      for (int y = 0; y < H && clear; ++y)
        for (int x = 0; x < W && clear; ++x) {
          if (!r.mask(x, y)) continue;
          for (int dy = -cfg.min_gap; dy <= cfg.min_gap && clear; ++dy)
            for (int dx = -cfg.min_gap; dx <= cfg.min_gap; ++dx) {
              const int nx = x + dx, ny = y + dy;
              if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
              if (occupancy(nx, ny) != 0) {
                clear = false;
                break;
              }
            }
        }
      if (!clear) continue;

      const auto id = static_cast<std::int32_t>(scene.annotations.buildings.size() + 1);
      for (std::size_t i = 0; i < r.mask.size(); ++i)
        if (r.mask[i]) occupancy[i] = id;
      scene.annotations.buildings.push_back(std::move(poly));
      boxes.push_back(box);
      placed = true;
    }
    if (!placed) scene.placement_shortfall = true;
  }

  scene.labels = rasterize_polygons(scene.annotations.buildings, W, H).labels;

  // Per-building brightness offsets, drawn in annotation order.
  std::vector<float> jitter(scene.annotations.buildings.size() + 1, 0.0f);
  for (std::size_t k = 1; k < jitter.size(); ++k)
    jitter[k] = static_cast<float>(uniform_real(rng, -cfg.building_jitter, cfg.building_jitter));
  std::normal_distribution<float> noise(0.0f, 1.0f);

  scene.image = Image(W, H, cfg.channels);
  for (int c = 0; c < cfg.channels; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const std::int32_t id = occupancy(x, y);
        float v = id ? cfg.building_mean + jitter[static_cast<std::size_t>(id)] : cfg.background_mean;
        if (cfg.noise_std > 0.0f) v += cfg.noise_std * noise(rng);
        scene.image.at(c, x, y) = std::clamp(v, 0.0f, 1.0f);
      }
  return scene;
}

bool has_close_pair(const LabelMap& labels, int max_gap) {
  const int r = max_gap + 1;
  for (int y = 0; y < labels.height(); ++y)
    for (int x = 0; x < labels.width(); ++x) {
      const std::int32_t a = labels(x, y);
      if (a == 0) continue;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= labels.width() || ny >= labels.height()) continue;
          const std::int32_t b = labels(nx, ny);
          if (b != 0 && b != a) return true;
        }
    }
  return false;
}

int min_instance_gap(const LabelMap& labels) {
  if (labels.component_count() < 2) return -1;
  const int limit = std::max(labels.width(), labels.height());
  for (int g = 0; g <= limit; ++g)
    if (has_close_pair(labels, g)) return g;
  return limit;
}

std::vector<std::string> benchmark_names() { return {"dense-touching", "sparse", "mixed-scale"}; }

std::vector<SceneConfig> benchmark_recipes(std::uint64_t seed) {
  SceneConfig dense;
  dense.width = dense.height = 64;
  dense.min_buildings = 8;
  dense.max_buildings = 16;
  dense.min_size = 7;
  dense.max_size = 16;
  dense.min_gap = 1;
  dense.adjacency = 0.6;
  dense.building_mean = 0.62f;
  dense.background_mean = 0.38f;
  dense.building_jitter = 0.06f;
  dense.noise_std = 0.14f;
  dense.seed = seed * 3 + 1;

  SceneConfig sparse;
  sparse.width = sparse.height = 64;
  sparse.min_buildings = 1;
  sparse.max_buildings = 4;
  sparse.min_size = 8;
  sparse.max_size = 18;
  sparse.min_gap = 4;
  sparse.rotated = true;
  sparse.building_mean = 0.7f;
  sparse.background_mean = 0.3f;
  sparse.building_jitter = 0.05f;
  sparse.noise_std = 0.08f;
  sparse.seed = seed * 3 + 2;

  SceneConfig mixed;
  mixed.width = mixed.height = 128;
  mixed.min_buildings = 3;
  mixed.max_buildings = 14;
  mixed.min_size = 5;
  mixed.max_size = 36;
  mixed.min_gap = 2;
  mixed.rotated = true;
  mixed.building_mean = 0.66f;
  mixed.background_mean = 0.34f;
  mixed.building_jitter = 0.06f;
  mixed.noise_std = 0.1f;
  mixed.seed = seed * 3 + 3;

  return {dense, sparse, mixed};
}

Suite make_suite(const std::string& name, const SceneConfig& config, int count) {
  Suite suite{name, config, {}};
  suite.scenes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) suite.scenes.push_back(generate_scene(config, static_cast<std::uint64_t>(i)));
  return suite;
}

namespace {
constexpr int kSuiteCounts[] = {320, 160, 80};

std::size_t suite_index(const std::string& name) {
  const auto names = benchmark_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw std::invalid_argument("unknown synthetic suite '" + name +
                              "' (expected dense-touching, sparse or mixed-scale)");
}

int scaled_count(int count, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("suite scale must be positive");
  return std::max(1, static_cast<int>(std::lround(count * scale)));
}
}  // namespace

int benchmark_scene_count(const std::string& name) { return kSuiteCounts[suite_index(name)]; }

Suite make_benchmark_suite(const std::string& name, std::uint64_t seed, double scale) {
  const std::size_t i = suite_index(name);
  return make_suite(name, benchmark_recipes(seed)[i], scaled_count(kSuiteCounts[i], scale));
}

std::vector<Suite> make_benchmark_suites(std::uint64_t seed, double scale) {
  std::vector<Suite> suites;
  for (const auto& name : benchmark_names()) suites.push_back(make_benchmark_suite(name, seed, scale));
  return suites;
}

std::vector<Sample> suite_samples(const Suite& suite) {
  std::vector<Sample> out;
  out.reserve(suite.scenes.size());
  char id[32];
  for (std::size_t i = 0; i < suite.scenes.size(); ++i) {
    std::snprintf(id, sizeof id, "%04zu", i);
    out.push_back({suite.name + "-" + id, suite.name, suite.scenes[i].image, suite.scenes[i].labels});
  }
  return out;
}

}  // namespace footseg
