#include "footseg/ingest/rle.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace footseg {

RleMask encode_rle(const BinaryMask& mask) {
  RleMask rle{mask.height(), mask.width(), {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = 0; y < mask.height(); ++y) {
      const std::uint8_t v = mask(x, y) ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask decode_rle(const RleMask& rle) {
  const std::uint64_t expected = static_cast<std::uint64_t>(rle.height) * static_cast<std::uint64_t>(rle.width);
  const std::uint64_t total = std::accumulate(rle.counts.begin(), rle.counts.end(), std::uint64_t{0});
  if (total != expected)
    throw std::invalid_argument("RLE counts sum to " + std::to_string(total) + ", expected " +
                                std::to_string(expected));
  BinaryMask mask(rle.width, rle.height);
  std::uint64_t pos = 0;
  std::uint8_t value = 0;
  for (std::uint32_t run : rle.counts) {
    for (std::uint32_t i = 0; i < run; ++i, ++pos) {
      const int x = static_cast<int>(pos / static_cast<std::uint64_t>(rle.height));
      const int y = static_cast<int>(pos % static_cast<std::uint64_t>(rle.height));
      mask(x, y) = value;
    }
    value ^= 1;
  }
  return mask;
}

}  // namespace footseg
