#pragma once

// Exact Euclidean distance transforms between pixel centers.
//
// The transform is the separable two-pass lower-envelope algorithm
// (columns, then rows) over squared distances. Squared distances stay
// integral throughout, so results are exact and bit-identical to a
// brute-force all-pairs minimum followed by the same sqrt.

#include <cstdint>

#include "footseg/raster.hpp"

namespace footseg {

// Squared distance from every pixel to the nearest pixel with label
// `component`. Throws std::out_of_range for an unknown component id.
Grid<std::int64_t> squared_distance_transform(const LabelMap& labels, int component);

Grid<double> distance_transform(const LabelMap& labels, int component);

// d1/d2 = smallest and second-smallest per-component distance, taken over
// distinct components. Cost is one transform per component (O(K * N)).
DistanceField two_nearest_distances(const LabelMap& labels);

}  // namespace footseg
