#include "common.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "footseg/synth.hpp"

namespace footseg::cli {
namespace fs = std::filesystem;

void add_common_options(CLI::App* sub, CommonOptions& options, bool out_required, const std::string& out_help) {
  sub->add_option("--seed", options.seed, "Seed for every random choice made by this command")
      ->capture_default_str();
  sub->add_option("--config", options.config,
                  "Flat 'key = value' file supplying defaults for this command's flags (key = flag name with "
                  "underscores); explicit flags win");
  auto* out = sub->add_option("--out", options.out, out_help);
  if (out_required) out->required();
  sub->add_option("--format", options.format, "Summary format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
}

std::vector<std::string> expand_config(const std::vector<std::string>& args, const CLI::App& app) {
  // args excludes the program name.
  std::size_t sub_pos = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i].rfind("-", 0) == 0) continue;
    for (const CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
      if (sub->get_name() == args[i]) sub_pos = i;
    break;
  }
  if (sub_pos == args.size()) return args;

  std::string config_path;
  for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;

  const train::ConfigValues values = train::read_config_file(config_path);
  std::vector<std::string> injected;
  for (const auto& [key, value] : values) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    const bool given = std::any_of(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, args.end(),
                                   [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    if (given) continue;
    injected.push_back(flag);
    injected.push_back(value);
  }
  std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, args.end());
  return out;
}

namespace {

std::string scalar_text(const ojson& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    std::ostringstream os;
    os << std::setprecision(6) << v.get<double>();
    return os.str();
  }
  return v.dump();
}

}  // namespace

void print_report(const Report& report, const std::string& format, std::ostream& out) {
  if (format == "table") {
    std::size_t width = 8;
    for (const auto& [key, value] : report.summary.items())
      if (!value.is_structured()) width = std::max(width, key.size());
    out << std::left << std::setw(static_cast<int>(width)) << "command" << "  " << report.command << "\n";
    out << std::setw(static_cast<int>(width)) << "status" << "  " << (report.passed ? "ok" : "failed") << "\n";
    if (!report.passed) out << std::setw(static_cast<int>(width)) << "failure" << "  " << report.failure << "\n";
    for (const auto& [key, value] : report.summary.items())
      if (!value.is_structured())
        out << std::setw(static_cast<int>(width)) << key << "  " << scalar_text(value) << "\n";
    for (const auto& line : report.table) out << line << "\n";
    for (const auto& a : report.artifacts) out << "wrote " << a << "\n";
    return;
  }
  ojson line;
  line["command"] = report.command;
  line["status"] = report.passed ? "ok" : "failed";
  if (!report.passed) line["failure"] = report.failure;
  for (const auto& [key, value] : report.summary.items()) line[key] = value;
  line["artifacts"] = report.artifacts;
  out << line.dump() << "\n";
}

fs::path prepare_out_dir(const std::string& out) {
  if (out.empty()) throw ValidationError("--out is required");
  const fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

std::string relative_to(const fs::path& path, const fs::path& base) {
  return fs::relative(fs::absolute(path), fs::absolute(base)).generic_string();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void add_train_flags(CLI::App* sub, TrainFlags& flags) {
  auto& c = flags.config;
  sub->add_option("--epochs", c.epochs, "Training epochs")->capture_default_str();
  sub->add_option("--batch-size", c.batch_size, "Mini-batch size")->capture_default_str();
  sub->add_option("--lr", c.lr, "SGD learning rate")->capture_default_str();
  sub->add_option("--l2", c.l2, "L2 weight decay constant")->capture_default_str();
  sub->add_option("--loss", flags.loss, "Objective: bce, bce+f, ewc, ewc+f or f")->capture_default_str();
  sub->add_option("--beta", c.beta, "F-Beta beta")->capture_default_str();
  sub->add_option("--fbeta-variant", flags.fbeta_variant, "F-Beta denominator form")
      ->check(CLI::IsMember({"standard", "literal"}))
      ->capture_default_str();
  sub->add_option("--w0", c.weights.w0, "Boundary weight amplitude")->capture_default_str();
  sub->add_option("--sigma", c.weights.sigma, "Boundary weight decay (pixels)")->capture_default_str();
  sub->add_option("--p", c.weights.p, "Exponent of the exponentiated weight map")->capture_default_str();
  sub->add_option("--class-balance", flags.class_balance, "Class weight term of the boundary map")
      ->check(CLI::IsMember({"uniform", "inverse_frequency"}))
      ->capture_default_str();
  sub->add_option("--dilated", c.dilated, "Dilated network (false = plain baseline with all dilations 1)")
      ->capture_default_str();
}

train::TrainConfig make_train_config(const TrainFlags& flags, std::uint64_t seed) {
  train::TrainConfig cfg = flags.config;
  cfg.loss = train::parse_loss_mode(flags.loss);
  cfg.fbeta_variant = flags.fbeta_variant == "literal" ? FBetaVariant::literal : FBetaVariant::standard;
  cfg.weights.class_balance =
      flags.class_balance == "inverse_frequency" ? ClassBalance::inverse_frequency : ClassBalance::uniform;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

void add_data_flags(CLI::App* sub, DataFlags& flags) {
  sub->add_option("--manifest", flags.manifests, "Dataset manifest (NDJSON); repeat for several datasets")
      ->delimiter(',');
  sub->add_option("--synthetic", flags.synthetic,
                  "Synthetic suite generated in memory from --seed: dense-touching, sparse or mixed-scale; "
                  "repeat for several")
      ->delimiter(',');
  sub->add_option("--scale", flags.scale, "Scene-count multiplier for --synthetic suites")->capture_default_str();
}

std::vector<NamedSamples> load_datasets(const DataFlags& flags, std::uint64_t seed) {
  std::vector<NamedSamples> out;
  for (const auto& m : flags.manifests) {
    std::vector<Sample> samples = load_manifest(m);
    if (samples.empty()) throw ValidationError(m + ": manifest lists no samples");
    std::string name = samples.front().dataset.empty() ? fs::path(m).stem().string() : samples.front().dataset;
    out.push_back({name, std::move(samples)});
  }
  for (const auto& name : flags.synthetic)
    out.push_back({name, suite_samples(make_benchmark_suite(name, seed, flags.scale))});
  if (out.empty()) throw ValidationError("no dataset given: use --manifest or --synthetic");
  return out;
}

SplitSamples split_samples(const std::vector<Sample>& samples, std::uint64_t seed) {
  const SplitIndices idx = split_indices(samples.size(), SplitSpec{seed});
  SplitSamples out;
  for (auto i : idx.train) out.train.push_back(samples[i]);
  for (auto i : idx.val) out.val.push_back(samples[i]);
  for (auto i : idx.test) out.test.push_back(samples[i]);
  return out;
}

ojson metrics_to_json(const MetricsReport& m) {
  return ojson{{"precision", m.precision},
               {"recall", m.recall},
               {"f1", m.f1},
               {"miou", m.miou},
               {"iou_background", m.iou_background},
               {"iou_building", m.iou_building},
               {"iou_building_mean", m.iou_building_mean},
               {"iou_building_std", m.iou_building_std}};
}

}  // namespace footseg::cli
