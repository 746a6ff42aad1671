#pragma once

// Uncompressed COCO-style run-length masks: column-major runs alternating
// background/foreground, always starting with a (possibly empty) background
// run.

#include <cstdint>
#include <vector>

#include "footseg/raster.hpp"

namespace footseg {

struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;
  friend bool operator==(const RleMask&, const RleMask&) = default;
};

RleMask encode_rle(const BinaryMask& mask);
// Throws if the counts do not sum to height * width.
BinaryMask decode_rle(const RleMask& rle);

}  // namespace footseg
