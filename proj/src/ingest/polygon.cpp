#include "footseg/ingest/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace footseg {
namespace {

// Crossings of the horizontal line at `yc` with every ring edge; an edge
// counts when exactly one endpoint lies above the line.
void collect_crossings(const Ring& ring, double yc, std::vector<double>& xs) {
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = ring[i];
    const Point& b = ring[j];
    if ((a.y > yc) != (b.y > yc)) xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
  }
}

}  // namespace

Rasterized rasterize_polygons(const std::vector<PolygonAnnotation>& polygons, int width, int height) {
  Grid<std::int32_t> raw(width, height, 0);
  std::vector<double> xs;
  for (std::size_t id = 0; id < polygons.size(); ++id) {
    const PolygonAnnotation& poly = polygons[id];
    if (poly.exterior.size() < 3) throw std::invalid_argument("polygon ring needs at least 3 vertices");
    for (const Ring& hole : poly.holes)
      if (hole.size() < 3) throw std::invalid_argument("polygon hole needs at least 3 vertices");

    double ymin = poly.exterior.front().y;
    double ymax = ymin;
    for (const Point& p : poly.exterior) {
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    const int row_begin = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
    const int row_end = std::min(height - 1, static_cast<int>(std::ceil(ymax)));
    for (int y = row_begin; y <= row_end; ++y) {
      const double yc = y + 0.5;
      xs.clear();
      collect_crossings(poly.exterior, yc, xs);
      for (const Ring& hole : poly.holes) collect_crossings(hole, yc, xs);
      std::sort(xs.begin(), xs.end());
      // Inside iff an odd number of crossings lie strictly right of the
      // center, i.e. xs[2i] <= xc < xs[2i+1].
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        const double lo = xs[k];
        const double hi = xs[k + 1];
        int x = std::max(0, static_cast<int>(std::floor(lo - 0.5)));
        for (; x < width; ++x) {
          const double xc = x + 0.5;
          if (xc >= hi) break;
          if (xc >= lo) raw(x, y) = static_cast<std::int32_t>(id + 1);
        }
      }
    }
  }
  LabelMap labels = LabelMap::compact(raw);
  BinaryMask mask = labels.to_mask();
  return {std::move(mask), std::move(labels)};
}

}  // namespace footseg
