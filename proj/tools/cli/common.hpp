#pragma once

// Shared plumbing for the footseg subcommands: uniform --seed/--config/
// --out/--format flags, config-file expansion, report printing and the
// 0 / 1 / 2 exit-code convention.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "footseg/ingest/dataset.hpp"
#include "footseg/metrics.hpp"
#include "footseg/train/config.hpp"

namespace footseg::cli {

using ojson = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

// Input or output that fails a check; reported with exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
  std::string format = "json";
};

struct Report {
  explicit Report(std::string name) : command(std::move(name)) {}

  std::string command;
  bool passed = true;       // false -> exit 1 after printing
  std::string failure;      // why passed is false
  ojson summary = ojson::object();
  std::vector<std::string> artifacts;
  std::vector<std::string> table;  // extra lines for --format table
};

using Runner = std::function<Report()>;

struct Registry {
  std::vector<std::pair<CLI::App*, Runner>> commands;
};

// Adds --seed, --config, --out and --format to a subcommand.
void add_common_options(CLI::App* sub, CommonOptions& options, bool out_required, const std::string& out_help);

// Expands "--config FILE" for the selected subcommand into "--key value"
// arguments for every key not already given on the command line. Config
// keys use underscores where flags use dashes.
std::vector<std::string> expand_config(const std::vector<std::string>& args, const CLI::App& app);

void print_report(const Report& report, const std::string& format, std::ostream& out);

std::filesystem::path prepare_out_dir(const std::string& out);
std::string relative_to(const std::filesystem::path& path, const std::filesystem::path& base);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Training flags mirroring the config keys of footseg::train::TrainConfig,
// initialised to its desk-scale defaults.
struct TrainFlags {
  train::TrainConfig config;
  std::string loss = "ewc+f";
  std::string fbeta_variant = "standard";
  std::string class_balance = "uniform";
};
void add_train_flags(CLI::App* sub, TrainFlags& flags);
train::TrainConfig make_train_config(const TrainFlags& flags, std::uint64_t seed);

// Datasets named by --manifest paths and/or --synthetic suite names.
struct DataFlags {
  std::vector<std::string> manifests;
  std::vector<std::string> synthetic;
  double scale = 1.0;
};
void add_data_flags(CLI::App* sub, DataFlags& flags);

struct NamedSamples {
  std::string name;
  std::vector<Sample> samples;
};
// Synthetic suites are generated from `seed`. Throws ValidationError when
// no dataset is given.
std::vector<NamedSamples> load_datasets(const DataFlags& flags, std::uint64_t seed);

struct SplitSamples {
  std::vector<Sample> train, val, test;
};
SplitSamples split_samples(const std::vector<Sample>& samples, std::uint64_t seed);

ojson metrics_to_json(const MetricsReport& metrics);

}  // namespace footseg::cli
