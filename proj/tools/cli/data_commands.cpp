#include <cmath>
#include <cstdio>
#include <map>

#include "commands.hpp"
#include "footseg/components.hpp"
#include "footseg/distance.hpp"
#include "footseg/ingest/polygon.hpp"
#include "footseg/ingest/rle.hpp"
#include "footseg/ingest/tiling.hpp"
#include "footseg/io.hpp"
#include "footseg/synth.hpp"
#include "footseg/weights.hpp"

namespace footseg::cli {
namespace fs = std::filesystem;

namespace {

std::string numbered(const char* prefix, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%05zu%s", prefix, i, ext);
  return buf;
}

}  // namespace

void register_rasterize(CLI::App& app, Registry& registry) {
  auto* sub = app.add_subcommand("rasterize", "Rasterize polygon annotations into mask, labels and RLE");
  auto common = std::make_shared<CommonOptions>();
  auto annotations = std::make_shared<std::string>();
  sub->add_option("--annotations", *annotations, "Annotation JSON ({width, height, buildings})")
      ->required()
      ->check(CLI::ExistingFile);
  add_common_options(sub, *common, true, "Output directory (mask.png, labels.png, mask.rle.json)");
  registry.commands.emplace_back(sub, [=] {
    const AnnotationSet set = read_annotations(*annotations);
    const Rasterized r = rasterize_polygons(set.buildings, set.width, set.height);
    const RleMask rle = encode_rle(r.mask);
    if (!(decode_rle(rle) == r.mask)) throw ValidationError("RLE round trip does not reproduce the mask");
    const fs::path dir = prepare_out_dir(common->out);
    io::write_mask(dir / "mask.png", r.mask);
    io::write_labels(dir / "labels.png", r.labels);
    write_text_file(dir / "mask.rle.json", rle_to_json(rle));
    Report rep{"rasterize"};
    rep.summary = {{"width", set.width},
                   {"height", set.height},
                   {"polygons", set.buildings.size()},
                   {"instances", r.labels.component_count()},
                   {"foreground_pixels", r.mask.foreground_count()}};
    rep.artifacts = {(dir / "mask.png").string(), (dir / "labels.png").string(), (dir / "mask.rle.json").string()};
    return rep;
  });
}

void register_weightmap(CLI::App& app, Registry& registry) {
  auto* sub = app.add_subcommand("weightmap", "Compute the boundary weight map and its exponentiated form");
  struct Opts {
    CommonOptions common;
    std::string labels, mask, annotations, class_balance = "uniform";
    WeightParams params;
  };
  auto o = std::make_shared<Opts>();
  auto* labels = sub->add_option("--labels", o->labels, "16-bit instance label PNG/PGM")->check(CLI::ExistingFile);
  auto* mask = sub->add_option("--mask", o->mask, "Binary mask image; instances = 8-connected components")
                   ->check(CLI::ExistingFile);
  auto* ann = sub->add_option("--annotations", o->annotations, "Annotation JSON")->check(CLI::ExistingFile);
  labels->excludes(mask)->excludes(ann);
  mask->excludes(ann);
  sub->add_option("--w0", o->params.w0, "Boundary weight amplitude")->capture_default_str();
  sub->add_option("--sigma", o->params.sigma, "Boundary weight decay (pixels)")->capture_default_str();
  sub->add_option("--p", o->params.p, "Exponent of the exponentiated map")->capture_default_str();
  sub->add_option("--class-balance", o->class_balance, "Class weight term")
      ->check(CLI::IsMember({"uniform", "inverse_frequency"}))
      ->capture_default_str();
  add_common_options(sub, o->common, true, "Output directory (weights.dfld, weights.png)");
  registry.commands.emplace_back(sub, [=] {
    LabelMap lm;
    if (!o->labels.empty()) lm = io::read_labels(o->labels);
    else if (!o->mask.empty()) lm = connected_components(io::read_mask(o->mask));
    else if (!o->annotations.empty()) {
      const AnnotationSet set = read_annotations(o->annotations);
      lm = rasterize_polygons(set.buildings, set.width, set.height).labels;
    } else {
      throw ValidationError("one of --labels, --mask or --annotations is required");
    }
    WeightParams params = o->params;
    params.class_balance =
        o->class_balance == "inverse_frequency" ? ClassBalance::inverse_frequency : ClassBalance::uniform;
    params.validate();
    const DistanceField dist = two_nearest_distances(lm);
    const WeightMaps maps = compute_weight_maps(lm, params);

    const double bound = std::exp(params.p);
    double wmin = INFINITY, wmax = -INFINITY, emin = INFINITY, emax = -INFINITY;
    for (double v : maps.boundary.values()) wmin = std::min(wmin, v), wmax = std::max(wmax, v);
    for (double v : maps.exponentiated.values()) emin = std::min(emin, v), emax = std::max(emax, v);

    const fs::path dir = prepare_out_dir(o->common.out);
    io::write_dfld(dir / "weights.dfld", {&dist.d1, &dist.d2, &maps.boundary, &maps.exponentiated});
    Grid<std::uint8_t> gray(lm.width(), lm.height());
    for (std::size_t i = 0; i < gray.size(); ++i)
      gray[i] = static_cast<std::uint8_t>(
          std::lround(std::clamp((maps.exponentiated[i] - 1.0) / (bound - 1.0), 0.0, 1.0) * 255.0));
    io::write_gray8(dir / "weights.png", gray);

    Report rep{"weightmap"};
    rep.summary = {{"width", lm.width()},     {"height", lm.height()},  {"instances", lm.component_count()},
                   {"boundary_min", wmin},    {"boundary_max", wmax},   {"exp_min", emin},
                   {"exp_max", emax},         {"exp_bound", bound},     {"theoretical_max", params.theoretical_max()}};
    rep.artifacts = {(dir / "weights.dfld").string(), (dir / "weights.png").string()};
    if (!(emin >= 1.0 && emax <= bound)) {
      rep.passed = false;
      rep.failure = "exponentiated weights outside [1, e^p]";
    }
    return rep;
  });
}

void register_tile(CLI::App& app, Registry& registry) {
  auto* sub = app.add_subcommand("tile", "Split an image (and optional mask) into factor x factor tiles");
  struct Opts {
    CommonOptions common;
    std::string image, mask;
    int factor = 4;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--image", o->image, "Input image")->required()->check(CLI::ExistingFile);
  sub->add_option("--mask", o->mask, "Optional binary mask tiled alongside")->check(CLI::ExistingFile);
  sub->add_option("--factor", o->factor, "Tiles per axis")->capture_default_str();
  add_common_options(sub, o->common, true, "Output directory (image_rR_cC.png, mask_rR_cC.png)");
  registry.commands.emplace_back(sub, [=] {
    const Image img = io::read_image(o->image);
    const auto tiles = tile(img, o->factor);
    if (!(stitch(tiles, o->factor) == img)) throw ValidationError("stitched tiles differ from the input image");
    std::vector<BinaryMask> mask_tiles;
    if (!o->mask.empty()) {
      const BinaryMask m = io::read_mask(o->mask);
      if (!m.same_shape(img.width(), img.height())) throw ValidationError("mask size differs from image size");
      mask_tiles = tile(m, o->factor);
      if (!(stitch(mask_tiles, o->factor) == m)) throw ValidationError("stitched mask tiles differ from the input");
    }
    const fs::path dir = prepare_out_dir(o->common.out);
    Report rep{"tile"};
    for (int r = 0; r < o->factor; ++r)
      for (int c = 0; c < o->factor; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * o->factor + c;
        const std::string suffix = "_r" + std::to_string(r) + "_c" + std::to_string(c) + ".png";
        io::write_image(dir / ("image" + suffix), tiles[i]);
        rep.artifacts.push_back((dir / ("image" + suffix)).string());
        if (!mask_tiles.empty()) {
          io::write_mask(dir / ("mask" + suffix), mask_tiles[i]);
          rep.artifacts.push_back((dir / ("mask" + suffix)).string());
        }
      }
    rep.summary = {{"factor", o->factor},
                   {"tiles", tiles.size()},
                   {"tile_width", tiles.front().width()},
                   {"tile_height", tiles.front().height()}};
    return rep;
  });
}

void register_split(CLI::App& app, Registry& registry) {
  auto* sub = app.add_subcommand("split", "Seeded train/val/test split of a manifest");
  struct Opts {
    CommonOptions common;
    std::string manifest;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--manifest", o->manifest, "Input manifest (NDJSON)")->required()->check(CLI::ExistingFile);
  add_common_options(sub, o->common, true, "Output directory (train/val/test.ndjson)");
  registry.commands.emplace_back(sub, [=] {
    const auto records = read_manifest(o->manifest);
    if (records.empty()) throw ValidationError(o->manifest + ": manifest lists no samples");
    const SplitIndices idx = split_indices(records.size(), SplitSpec{o->common.seed});
    const fs::path dir = prepare_out_dir(o->common.out);
    const fs::path base = fs::path(o->manifest).parent_path();
    auto rebase = [&](const std::string& p) {
      const fs::path path(p);
      return path.is_absolute() ? p : relative_to(base / path, dir);
    };
    Report rep{"split"};
    for (const auto& [name, list] : {std::pair{"train", &idx.train}, {"val", &idx.val}, {"test", &idx.test}}) {
      std::vector<ManifestRecord> out;
      for (auto i : *list) out.push_back({rebase(records[i].image), rebase(records[i].annotation), records[i].dataset});
      const fs::path path = dir / (std::string(name) + ".ndjson");
      write_manifest(path, out);
      rep.summary[name] = out.size();
      rep.artifacts.push_back(path.string());
    }
    return rep;
  });
}

void register_combine(CLI::App& app, Registry& registry) {
  auto* sub = app.add_subcommand("combine", "Build the rescaled cross-dataset training set");
  struct Opts {
    CommonOptions common;
    std::vector<std::string> manifests;
    std::vector<double> fractions;
    int target = 256;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--manifest", o->manifests, "Dataset manifest; repeat per dataset")
      ->required()
      ->delimiter(',')
      ->check(CLI::ExistingFile);
  sub->add_option("--fraction", o->fractions, "Inclusion fraction per manifest, in order (default 1)")
      ->delimiter(',');
  sub->add_option("--target", o->target, "Side length of the combined samples")->capture_default_str();
  add_common_options(sub, o->common, true, "Output directory (images/, labels/, manifest.ndjson)");
  registry.commands.emplace_back(sub, [=] {
    if (!o->fractions.empty() && o->fractions.size() != o->manifests.size())
      throw ValidationError("--fraction must be given once per --manifest");
    std::vector<DatasetPart> parts;
    for (std::size_t i = 0; i < o->manifests.size(); ++i)
      parts.push_back({load_manifest(o->manifests[i]), o->fractions.empty() ? 1.0 : o->fractions[i]});
    const auto combined = build_cross_dataset(parts, CrossDatasetOptions{o->target, o->common.seed});
    const fs::path dir = prepare_out_dir(o->common.out);
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "labels");
    std::vector<ManifestRecord> records;
    std::map<std::string, int> per_dataset;
    for (std::size_t i = 0; i < combined.size(); ++i) {
      const std::string image = "images/" + numbered("", i, ".png");
      const std::string labels = "labels/" + numbered("", i, ".png");
      io::write_image(dir / image, combined[i].image);
      io::write_labels(dir / labels, combined[i].labels);
      records.push_back({image, labels, combined[i].dataset});
      ++per_dataset[combined[i].dataset];
    }
    write_manifest(dir / "manifest.ndjson", records);
    Report rep{"combine"};
    rep.summary = {{"samples", combined.size()}, {"target", o->target}, {"per_dataset", per_dataset}};
    for (const auto& [name, n] : per_dataset) rep.table.push_back("  " + name + ": " + std::to_string(n));
    rep.artifacts = {(dir / "manifest.ndjson").string()};
    return rep;
  });
}

void register_synth(CLI::App& app, Registry& registry) {
  auto* sub = app.add_subcommand("synth", "Generate the synthetic benchmark suites");
  struct Opts {
    CommonOptions common;
    std::vector<std::string> suites;
    double scale = 1.0;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--suite", o->suites, "Suite(s) to generate (default: all three)")
      ->delimiter(',')
      ->check(CLI::IsMember(benchmark_names()));
  sub->add_option("--scale", o->scale, "Scene-count multiplier")->capture_default_str();
  add_common_options(sub, o->common, true, "Output directory (<suite>/images, annotations, manifest.ndjson)");
  registry.commands.emplace_back(sub, [=] {
    const std::vector<std::string> names = o->suites.empty() ? benchmark_names() : o->suites;
    const fs::path dir = prepare_out_dir(o->common.out);
    Report rep{"synth"};
    ojson suites = ojson::object();
    for (const auto& name : names) {
      const Suite suite = make_benchmark_suite(name, o->common.seed, o->scale);
      const fs::path sdir = dir / name;
      fs::create_directories(sdir / "images");
      fs::create_directories(sdir / "annotations");
      std::vector<ManifestRecord> records;
      std::string meta;
      std::size_t shortfalls = 0, close_pairs = 0, building_pixels = 0, pixels = 0;
      for (std::size_t i = 0; i < suite.scenes.size(); ++i) {
        const Scene& s = suite.scenes[i];
        const std::string image = "images/" + numbered("", i, ".png");
        const std::string ann = "annotations/" + numbered("", i, ".json");
        io::write_image(sdir / image, s.image);
        write_annotations(sdir / ann, s.annotations);
        records.push_back({image, ann, name});
        const bool close = has_close_pair(s.labels, 2);
        shortfalls += s.placement_shortfall;
        close_pairs += close;
        building_pixels += s.labels.to_mask().foreground_count();
        pixels += static_cast<std::size_t>(s.labels.width()) * s.labels.height();
        meta += ojson{{"index", i},
                      {"requested", s.requested_buildings},
                      {"placed", s.labels.component_count()},
                      {"placement_shortfall", s.placement_shortfall},
                      {"min_gap", min_instance_gap(s.labels)},
                      {"close_pair", close}}
                    .dump() +
                "\n";
      }
      write_manifest(sdir / "manifest.ndjson", records);
      write_text_file(sdir / "scenes.ndjson", meta);
      const double n = static_cast<double>(suite.scenes.size());
      suites[name] = {{"scenes", suite.scenes.size()},
                      {"placement_shortfalls", shortfalls},
                      {"close_pair_fraction", static_cast<double>(close_pairs) / n},
                      {"building_fraction", static_cast<double>(building_pixels) / static_cast<double>(pixels)}};
      char line[160];
      std::snprintf(line, sizeof line, "  %-15s scenes=%zu shortfalls=%zu close_pairs=%.3f building_fraction=%.3f",
                    name.c_str(), suite.scenes.size(), shortfalls, static_cast<double>(close_pairs) / n,
                    static_cast<double>(building_pixels) / static_cast<double>(pixels));
      rep.table.push_back(line);
      rep.artifacts.push_back((sdir / "manifest.ndjson").string());
    }
    rep.summary = {{"seed", o->common.seed}, {"suites", suites}};
    return rep;
  });
}

}  // namespace footseg::cli
