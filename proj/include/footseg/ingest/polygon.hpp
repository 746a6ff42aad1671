#pragma once

// Pixel-space building polygons and their rasterization.

#include <utility>
#include <vector>

#include "footseg/raster.hpp"

namespace footseg {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

using Ring = std::vector<Point>;  // implicitly closed

struct PolygonAnnotation {
  Ring exterior;
  std::vector<Ring> holes;
  friend bool operator==(const PolygonAnnotation&, const PolygonAnnotation&) = default;
};

struct AnnotationSet {
  int width = 0;
  int height = 0;
  std::vector<PolygonAnnotation> buildings;
};

struct Rasterized {
  BinaryMask mask;
  LabelMap labels;
};

// Even-odd scanline fill sampled at pixel centers: pixel (x, y) belongs to a
// polygon when (x + 0.5, y + 0.5) is inside it. Each polygon gets its own
// instance; later polygons overwrite earlier ones where they overlap.
// Instance ids are compacted to 1..K in raster order. Throws on a ring with
// fewer than three vertices.
Rasterized rasterize_polygons(const std::vector<PolygonAnnotation>& polygons, int width, int height);

}  // namespace footseg
