#pragma once

// Sample lists: manifests, seeded splits and cross-dataset combination.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "footseg/ingest/polygon.hpp"
#include "footseg/ingest/rle.hpp"
#include "footseg/raster.hpp"

namespace footseg {

struct Sample {
  std::string id;
  std::string dataset;
  Image image;
  LabelMap labels;
};

// Test takes ceil(20%) of the shuffled list; validation takes floor(20%) of
// the remainder; training gets the rest.
struct SplitSpec {
  std::uint64_t seed = 0;
  static constexpr double test_fraction = 0.20;
  static constexpr double val_fraction = 0.20;
};

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

struct Splits {
  std::vector<std::string> train, val, test;
};

SplitIndices split_indices(std::size_t count, const SplitSpec& spec);
// Throws on an empty list.
Splits split_dataset(const std::vector<std::string>& ids, const SplitSpec& spec);

// round(fraction * count), at least 1, chosen by a seeded shuffle and
// returned in ascending order. Throws unless 0 < fraction <= 1.
std::vector<std::size_t> subsample_indices(std::size_t count, double fraction, std::uint64_t seed);

struct DatasetPart {
  std::vector<Sample> samples;
  double fraction = 1.0;
};

struct CrossDatasetOptions {
  int target = 256;
  std::uint64_t seed = 0;
};

// Brings one sample to target x target. Samples at least twice the target
// on both axes are resized to 2*target and split into 2x2 tiles; anything
// smaller is resized straight to the target.
std::vector<Sample> prepare_for_target(const Sample& sample, int target);

// Subsamples each part by its inclusion fraction, rescales/tiles every
// sample to the target size and shuffles the union deterministically.
std::vector<Sample> build_cross_dataset(const std::vector<DatasetPart>& parts,
                                        const CrossDatasetOptions& options);

// Newline-delimited JSON: {"image": ..., "annotation": ..., "dataset": ...}.
// Paths are relative to the manifest's directory unless absolute.
struct ManifestRecord {
  std::string image;
  std::string annotation;
  std::string dataset;
  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

// Loads the image and rasterizes the annotation polygons. An annotation
// path ending in .png or .pgm is read as a 16-bit instance label raster.
Sample load_sample(const ManifestRecord& record, const std::filesystem::path& base_dir);
std::vector<Sample> load_manifest(const std::filesystem::path& path);

// Annotation JSON: {"width", "height", "buildings": [{"exterior": [[x,y],...], "holes": [...]}]}
AnnotationSet read_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, const AnnotationSet& set);
std::string annotations_to_json(const AnnotationSet& set);
AnnotationSet annotations_from_json(const std::string& text);

// RLE JSON: {"size": [h, w], "counts": [...]}
std::string rle_to_json(const RleMask& rle);
RleMask rle_from_json(const std::string& text);

}  // namespace footseg
