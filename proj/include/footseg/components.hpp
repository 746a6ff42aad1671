#pragma once

#include "footseg/raster.hpp"

namespace footseg {

enum class Connectivity { four = 4, eight = 8 };

// Labels connected foreground regions. Labels are assigned in raster-scan
// order of each region's first pixel, starting at 1.
LabelMap connected_components(const BinaryMask& mask, Connectivity connectivity = Connectivity::eight);

}  // namespace footseg
