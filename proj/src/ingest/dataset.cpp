#include "footseg/ingest/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "footseg/ingest/tiling.hpp"
#include "footseg/io.hpp"

namespace footseg {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::size_t> shuffled(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
}

Ring ring_from_json(const json& j) {
  Ring ring;
  for (const auto& p : j) ring.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return ring;
}

json ring_to_json(const Ring& ring) {
  json j = json::array();
  for (const Point& p : ring) j.push_back({p.x, p.y});
  return j;
}

}  // namespace

SplitIndices split_indices(std::size_t count, const SplitSpec& spec) {
  const std::vector<std::size_t> order = shuffled(count, spec.seed);
  const std::size_t n_test = (count * 20 + 99) / 100;
  const std::size_t rest = count - n_test;
  const std::size_t n_val = rest * 20 / 100;
  SplitIndices s;
  s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
               order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), order.end());
  return s;
}

Splits split_dataset(const std::vector<std::string>& ids, const SplitSpec& spec) {
  if (ids.empty()) throw std::invalid_argument("split_dataset: empty sample list");
  const SplitIndices idx = split_indices(ids.size(), spec);
  Splits out;
  for (std::size_t i : idx.train) out.train.push_back(ids[i]);
  for (std::size_t i : idx.val) out.val.push_back(ids[i]);
  for (std::size_t i : idx.test) out.test.push_back(ids[i]);
  return out;
}

std::vector<std::size_t> subsample_indices(std::size_t count, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("inclusion fraction must be in (0, 1]");
  if (count == 0) return {};
  const std::size_t keep =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(fraction * static_cast<double>(count))), 1, count);
  std::vector<std::size_t> order = shuffled(count, seed);
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<Sample> prepare_for_target(const Sample& sample, int target) {
  if (target <= 0) throw std::invalid_argument("target size must be positive");
  const int w = sample.image.width();
  const int h = sample.image.height();
  std::vector<Sample> out;
  if (w >= 2 * target && h >= 2 * target) {
    const int big = 2 * target;
    const Image image = resize(sample.image, big, big, ResizeMode::bilinear);
    const LabelMap labels = resize_nearest(sample.labels, big, big);
    std::vector<Image> image_tiles = tile(image, 2);
    std::vector<LabelMap> label_tiles = tile(labels, 2);
    for (std::size_t i = 0; i < image_tiles.size(); ++i)
      out.push_back({sample.id + "#" + std::to_string(i), sample.dataset, std::move(image_tiles[i]),
                     std::move(label_tiles[i])});
  } else {
    out.push_back({sample.id, sample.dataset, resize(sample.image, target, target, ResizeMode::bilinear),
                   resize_nearest(sample.labels, target, target)});
  }
  return out;
}

std::vector<Sample> build_cross_dataset(const std::vector<DatasetPart>& parts,
                                        const CrossDatasetOptions& options) {
  std::vector<Sample> combined;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const DatasetPart& part = parts[p];
    const auto keep = subsample_indices(part.samples.size(), part.fraction, options.seed + 0x9e3779b97f4a7c15ULL * (p + 1));
    for (std::size_t i : keep)
      for (Sample& s : prepare_for_target(part.samples[i], options.target)) combined.push_back(std::move(s));
  }
  const std::vector<std::size_t> order = shuffled(combined.size(), options.seed);
  std::vector<Sample> out;
  out.reserve(combined.size());
  for (std::size_t i : order) out.push_back(std::move(combined[i]));
  return out;
}

std::vector<ManifestRecord> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open manifest");
  std::vector<ManifestRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      records.push_back({j.at("image").get<std::string>(), j.at("annotation").get<std::string>(),
                         j.value("dataset", std::string{})});
    } catch (const json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_manifest(const fs::path& path, const std::vector<ManifestRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records)
    out << json{{"image", r.image}, {"annotation", r.annotation}, {"dataset", r.dataset}}.dump() << '\n';
  write_text(path, out.str());
}

Sample load_sample(const ManifestRecord& record, const fs::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  Sample s;
  s.id = fs::path(record.image).stem().string();
  s.dataset = record.dataset;
  s.image = io::read_image(resolve(record.image));
  const fs::path annotation = resolve(record.annotation);
  std::string ext = annotation.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png" || ext == ".pgm") {
    s.labels = io::read_labels(annotation);
  } else {
    const AnnotationSet ann = read_annotations(annotation);
    s.labels = rasterize_polygons(ann.buildings, ann.width, ann.height).labels;
  }
  if (s.labels.width() != s.image.width() || s.labels.height() != s.image.height())
    throw std::runtime_error(record.annotation + ": annotation size does not match image");
  return s;
}

std::vector<Sample> load_manifest(const fs::path& path) {
  std::vector<Sample> samples;
  for (const auto& r : read_manifest(path)) samples.push_back(load_sample(r, path.parent_path()));
  return samples;
}

std::string annotations_to_json(const AnnotationSet& set) {
  json buildings = json::array();
  for (const auto& b : set.buildings) {
    json holes = json::array();
    for (const auto& h : b.holes) holes.push_back(ring_to_json(h));
    buildings.push_back({{"exterior", ring_to_json(b.exterior)}, {"holes", holes}});
  }
  return json{{"width", set.width}, {"height", set.height}, {"buildings", buildings}}.dump() + "\n";
}

AnnotationSet annotations_from_json(const std::string& text) {
  const json j = json::parse(text);
  AnnotationSet set;
  set.width = j.at("width").get<int>();
  set.height = j.at("height").get<int>();
  if (set.width <= 0 || set.height <= 0) throw std::invalid_argument("annotation dimensions must be positive");
  for (const auto& b : j.at("buildings")) {
    PolygonAnnotation poly;
    poly.exterior = ring_from_json(b.at("exterior"));
    if (b.contains("holes"))
      for (const auto& h : b.at("holes")) poly.holes.push_back(ring_from_json(h));
    set.buildings.push_back(std::move(poly));
  }
  return set;
}

AnnotationSet read_annotations(const fs::path& path) {
  try {
    return annotations_from_json(read_text(path));
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_annotations(const fs::path& path, const AnnotationSet& set) {
  write_text(path, annotations_to_json(set));
}

std::string rle_to_json(const RleMask& rle) {
  return json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}}.dump() + "\n";
}

RleMask rle_from_json(const std::string& text) {
  const json j = json::parse(text);
  RleMask rle;
  rle.height = j.at("size").at(0).get<int>();
  rle.width = j.at("size").at(1).get<int>();
  rle.counts = j.at("counts").get<std::vector<std::uint32_t>>();
  return rle;
}

}  // namespace footseg
