#include "footseg/components.hpp"

#include <numeric>
#include <vector>

namespace footseg {
namespace {

// Union-find over provisional labels with path halving. The smaller root is
// kept as representative so the final renumbering follows scan order.
class DisjointSets {
 public:
  int make() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }
  int size() const { return static_cast<int>(parent_.size()); }

 private:
  std::vector<int> parent_;
};

}  // namespace

LabelMap connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const int w = mask.width();
  const int h = mask.height();
  Grid<std::int32_t> provisional(w, h, -1);
  DisjointSets sets;

  const bool diagonal = connectivity == Connectivity::eight;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      int label = -1;
      auto join = [&](int nx, int ny) {
        if (nx < 0 || nx >= w || ny < 0) return;
        const int other = provisional(nx, ny);
        if (other < 0) return;
        if (label < 0) label = other;
        else sets.unite(label, other);
      };
      join(x - 1, y);
      join(x, y - 1);
      if (diagonal) {
        join(x - 1, y - 1);
        join(x + 1, y - 1);
      }
      if (label < 0) label = sets.make();
      provisional(x, y) = label;
    }
  }

  std::vector<std::int32_t> final_label(static_cast<std::size_t>(sets.size()), 0);
  std::int32_t next = 0;
  Grid<std::int32_t> labels(w, h, 0);
  for (std::size_t i = 0; i < provisional.size(); ++i) {
    const int p = provisional[i];
    if (p < 0) continue;
    const int root = sets.find(p);
    if (final_label[root] == 0) final_label[root] = ++next;
    labels[i] = final_label[root];
  }
  return LabelMap(std::move(labels), next);
}

}  // namespace footseg
