#pragma once

// Training hyperparameters, the cross-dataset schedule and the flat
// key = value config format shared by the CLI.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "footseg/losses.hpp"
#include "footseg/weights.hpp"

namespace footseg::train {

// Objective = [cross-entropy term] + [1 - F_beta].
//   bce    unit-weight cross-entropy
//   ewc    cross-entropy weighted by the exponentiated boundary map
enum class LossMode { bce, bce_f, ewc, ewc_f, f };

// "BCE", "BCE+F(1.0)", "EWC", "EWC+F(0.1)", "F(4.0)".
std::string loss_label(LossMode mode, double beta);
// Accepts "bce", "bce+f", "ewc", "ewc+f", "f" in any case. Throws on anything else.
LossMode parse_loss_mode(const std::string& text);
std::string loss_mode_name(LossMode mode);
bool uses_fbeta(LossMode mode);
bool uses_cross_entropy(LossMode mode);
bool uses_weight_map(LossMode mode);

struct TrainConfig {
  int epochs = 15;
  int batch_size = 4;
  double lr = 0.05;
  double l2 = 1e-4;
  LossMode loss = LossMode::ewc_f;
  double beta = 1.0;
  FBetaVariant fbeta_variant = FBetaVariant::standard;
  WeightParams weights;
  bool dilated = true;
  std::uint64_t seed = 0;

  // 60 epochs at lr 1e-4: the full-scale recipe.
  static TrainConfig full_scale();

  ObjectiveSpec objective() const;
  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct Schedule {
  bool phase1_enabled = true;
  int phase1_epochs = 5;
  int phase2_epochs = 10;
  int target = 64;                 // combined-set tile size
  std::vector<double> fractions;  // per-suite inclusion; empty = all 1.0

  void validate(std::size_t suite_count) const;
};

// Flat "key = value" lines; '#' starts a comment. Keys:
//   epochs batch_size lr l2 loss beta fbeta_variant w0 sigma p class_balance
//   dilated seed phase1 phase1_epochs phase2_epochs target fractions
using ConfigValues = std::map<std::string, std::string>;

ConfigValues parse_config_text(const std::string& text);
ConfigValues read_config_file(const std::filesystem::path& path);
// Throws std::invalid_argument on unknown keys or malformed values.
void apply_config(const ConfigValues& values, TrainConfig& cfg, Schedule* schedule = nullptr);
std::string format_config(const TrainConfig& cfg, const Schedule* schedule = nullptr);

}  // namespace footseg::train
