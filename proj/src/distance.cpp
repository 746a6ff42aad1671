#include "footseg/distance.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace footseg {
namespace {

constexpr std::int64_t kNoSite = std::numeric_limits<std::int64_t>::max();

struct Envelope {
  std::vector<int> site;
  std::vector<double> boundary;
};

// One 1-D pass over `n` samples spaced `stride` apart. Entries equal to
// kNoSite do not contribute parabolas; if no entry does, the line stays
// kNoSite.
void transform_line(std::int64_t* line, int n, std::ptrdiff_t stride, std::vector<std::int64_t>& f,
                    Envelope& env) {
  f.resize(n);
  for (int i = 0; i < n; ++i) f[i] = line[i * stride];

  env.site.clear();
  env.boundary.clear();
  for (int q = 0; q < n; ++q) {
    if (f[q] == kNoSite) continue;
    const double fq = static_cast<double>(f[q]) + static_cast<double>(q) * q;
    double s = -std::numeric_limits<double>::infinity();
    while (!env.site.empty()) {
      const int v = env.site.back();
      const double fv = static_cast<double>(f[v]) + static_cast<double>(v) * v;
      s = (fq - fv) / (2.0 * (q - v));
      if (s <= env.boundary.back()) {
        env.site.pop_back();
        env.boundary.pop_back();
        s = -std::numeric_limits<double>::infinity();
      } else {
        break;
      }
    }
    env.site.push_back(q);
    env.boundary.push_back(s);
  }
  if (env.site.empty()) return;

  std::size_t k = 0;
  for (int x = 0; x < n; ++x) {
    while (k + 1 < env.site.size() && env.boundary[k + 1] < x) ++k;
    const std::int64_t dx = x - env.site[k];
    line[x * stride] = f[env.site[k]] + dx * dx;
  }
}

}  // namespace

Grid<std::int64_t> squared_distance_transform(const LabelMap& labels, int component) {
  if (component < 1 || component > labels.component_count())
    throw std::out_of_range("unknown component id " + std::to_string(component) + " (have " +
                            std::to_string(labels.component_count()) + ")");
  const int w = labels.width();
  const int h = labels.height();
  Grid<std::int64_t> out(w, h, kNoSite);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (labels[i] == component) out[i] = 0;

  std::vector<std::int64_t> scratch;
  Envelope env;
  std::int64_t* data = out.values().data();
  for (int x = 0; x < w; ++x) transform_line(data + x, h, w, scratch, env);
  for (int y = 0; y < h; ++y) transform_line(data + static_cast<std::ptrdiff_t>(y) * w, w, 1, scratch, env);
  return out;
}

Grid<double> distance_transform(const LabelMap& labels, int component) {
  const Grid<std::int64_t> sq = squared_distance_transform(labels, component);
  Grid<double> out(sq.width(), sq.height());
  for (std::size_t i = 0; i < sq.size(); ++i) out[i] = std::sqrt(static_cast<double>(sq[i]));
  return out;
}

DistanceField two_nearest_distances(const LabelMap& labels) {
  const int w = labels.width();
  const int h = labels.height();
  Grid<std::int64_t> best1(w, h, kNoSite);
  Grid<std::int64_t> best2(w, h, kNoSite);
  for (int k = 1; k <= labels.component_count(); ++k) {
    const Grid<std::int64_t> sq = squared_distance_transform(labels, k);
    for (std::size_t i = 0; i < sq.size(); ++i) {
      const std::int64_t d = sq[i];
      if (d < best1[i]) {
        best2[i] = best1[i];
        best1[i] = d;
      } else if (d < best2[i]) {
        best2[i] = d;
      }
    }
  }

  DistanceField field{Grid<double>(w, h, DistanceField::unreachable()),
                      Grid<double>(w, h, DistanceField::unreachable())};
  for (std::size_t i = 0; i < best1.size(); ++i) {
    if (best1[i] != kNoSite) field.d1[i] = std::sqrt(static_cast<double>(best1[i]));
    if (best2[i] != kNoSite) field.d2[i] = std::sqrt(static_cast<double>(best2[i]));
  }
  return field;
}

}  // namespace footseg
