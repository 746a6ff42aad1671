#pragma once

// Synthetic urban scenes: rectangular footprints (optionally rotated) on a
// noisy background, with exact instance labels and polygon annotations.

#include <cstdint>
#include <string>
#include <vector>

#include "footseg/ingest/dataset.hpp"
#include "footseg/ingest/polygon.hpp"
#include "footseg/raster.hpp"

namespace footseg {

struct SceneConfig {
  int width = 64;
  int height = 64;
  int channels = 3;
  int min_buildings = 2;
  int max_buildings = 5;
  int min_size = 8;   // side length, pixels
  int max_size = 20;
  int min_gap = 2;    // Chebyshev gap in background pixels; 0 allows touching
  bool rotated = false;
  // Probability that a building is placed flush against an existing one at
  // a gap of exactly min_gap (or min_gap + 1). Axis-aligned scenes only.
  double adjacency = 0.0;
  float building_mean = 0.7f;
  float background_mean = 0.3f;
  float building_jitter = 0.05f;  // per-building uniform offset
  float noise_std = 0.1f;
  int max_attempts = 200;          // per building
  std::uint64_t seed = 0;

  void validate() const;
};

struct Scene {
  Image image;
  LabelMap labels;
  AnnotationSet annotations;
  int requested_buildings = 0;
  bool placement_shortfall = false;  // fewer buildings than requested fit
};

// Deterministic in (cfg.seed, index).
Scene generate_scene(const SceneConfig& cfg, std::uint64_t index = 0);

// Smallest Chebyshev gap (background pixels between) over all instance
// pairs; -1 when fewer than two instances.
int min_instance_gap(const LabelMap& labels);

// True if some pair of distinct instances is separated by at most max_gap.
bool has_close_pair(const LabelMap& labels, int max_gap);

struct Suite {
  std::string name;
  SceneConfig config;
  std::vector<Scene> scenes;
};

// Fixed recipes: "dense-touching", "sparse", "mixed-scale". Sizes are
// 320 / 160 / 80 scenes, so the largest suite is 4x the smallest.
std::vector<SceneConfig> benchmark_recipes(std::uint64_t seed);
std::vector<std::string> benchmark_names();
std::vector<Suite> make_benchmark_suites(std::uint64_t seed, double scale = 1.0);
Suite make_suite(const std::string& name, const SceneConfig& config, int count);

// Scene count of a named suite at scale 1. Throws std::invalid_argument on
// an unknown name.
int benchmark_scene_count(const std::string& name);
// max(1, round(count * scale)) scenes of one named suite; identical to the
// matching entry of make_benchmark_suites(seed, scale).
Suite make_benchmark_suite(const std::string& name, std::uint64_t seed, double scale = 1.0);

// Samples with ids "<suite>-NNNN" tagged with the suite name.
std::vector<Sample> suite_samples(const Suite& suite);

}  // namespace footseg
