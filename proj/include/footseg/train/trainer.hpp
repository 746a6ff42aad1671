#pragma once

// Mini-batch SGD training of MiniSegNet, validation-based checkpoint
// selection, the two-phase cross-dataset schedule and the beta sweep.
//
// Everything here is single-threaded and seed-determined: the same config,
// seed and data give bit-identical parameters, histories and logs.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <list>
#include <unordered_map>
#include <vector>

#include "footseg/ingest/dataset.hpp"
#include "footseg/metrics.hpp"
#include "footseg/net/model.hpp"
#include "footseg/train/config.hpp"

namespace footseg::train {

// Thrown when a training batch produces a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, std::size_t batch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch), batch_(batch) {}
  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  int epoch_;
  std::size_t batch_;
};

// Exponentiated boundary maps keyed by a hash of the instance labels.
class WeightCache {
 public:
  explicit WeightCache(WeightParams params) : params_(params) {}
  const WeightMap& get(const LabelMap& labels);
  std::size_t size() const { return maps_.size(); }
  std::size_t computed() const { return computed_; }

 private:
  WeightParams params_;
  std::unordered_map<std::uint64_t, std::list<std::pair<LabelMap, WeightMap>>> maps_;
  std::size_t computed_ = 0;
};

std::uint64_t label_hash(const LabelMap& labels);

// Mean per-image loss terms. fbeta is the mean F_beta measure under the
// configured form, reported even when the objective omits it; wce is 0
// without a cross-entropy term.
struct LossSummary {
  double wce = 0.0;
  double fbeta = 0.0;
  double total = 0.0;
};

struct EvalResult {
  double loss = 0.0;  // mean per-image objective
  LossSummary terms;
  MetricsReport metrics;
  double separation_rate = 0.0;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  LossSummary train_terms;
  LossSummary val_terms;
  MetricsReport val_metrics;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::vector<double> step_losses;  // mean batch objective, one per SGD step
  int best_epoch = 0;               // 1-based, per select_checkpoint
  net::MiniSegNet<float> best_model;
  net::MiniSegNet<float> final_model;
};

// Highest validation mIoU; ties go to lower validation loss, then to the
// earlier epoch. Returns the 1-based epoch. Throws on an empty history.
int select_checkpoint(const std::vector<EpochRecord>& history);

// Packs the images into an (N, C, H, W) tensor. Throws if their shapes differ.
net::Tensor<float> pack_images(const std::vector<const Sample*>& batch);

// Per-image objective and logit gradients for a batch of logits. grad is
// scaled by 1/N so it is the gradient of the batch mean.
LossSummary batch_objective(const net::Tensor<float>& logits, const std::vector<const Sample*>& batch,
                       const TrainConfig& cfg, WeightCache* cache, net::Tensor<float>* grad);

// Building probabilities for one image of a logits tensor.
std::vector<double> building_probabilities(const net::Tensor<float>& logits, int index);

// Fraction of samples whose predicted 8-connected component count equals
// the ground truth's.
double separation_rate(const std::vector<BinaryMask>& predicted, const std::vector<Sample>& samples);

std::vector<BinaryMask> predict_masks(const net::MiniSegNet<float>& model, const std::vector<Sample>& samples);

EvalResult evaluate(const net::MiniSegNet<float>& model, const std::vector<Sample>& samples,
                    const TrainConfig& cfg, WeightCache* cache = nullptr);

struct TrainOptions {
  const net::MiniSegNet<float>* init = nullptr;  // otherwise seeded init
  std::ostream* log = nullptr;                   // NDJSON event lines
  std::string run_name;                          // tags log lines
};

// Throws std::invalid_argument on empty splits, TrainingDiverged on a
// non-finite loss.
TrainResult train(const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  const TrainConfig& cfg, const TrainOptions& options = {});

struct SuiteData {
  std::string name;
  std::vector<Sample> train;
  std::vector<Sample> val;
};

struct CrossDatasetResult {
  std::optional<TrainResult> phase1;
  std::vector<TrainResult> per_suite;  // same order as the input suites
};

// Phase 1 trains on the combined set built from every suite's training
// samples (inclusion fractions applied, rescaled to the target size) and
// validates on the combined validation samples. The best phase-1 model
// seeds a fresh phase-2 fine-tune on each suite. With phase 1 disabled
// each suite trains from the seeded initialization.
CrossDatasetResult cross_dataset_train(const std::vector<SuiteData>& suites, const Schedule& schedule,
                                       const TrainConfig& cfg, std::ostream* log = nullptr);

struct SweepRow {
  double beta = 0.0;
  std::uint64_t seed = 0;
  double ap = 0.0;  // pooled precision
  double ar = 0.0;  // pooled recall
  double f1 = 0.0;
  double miou = 0.0;
  double separation_rate = 0.0;
};

struct SweepSummary {
  double beta = 0.0;
  double ap_mean = 0.0, ap_std = 0.0;
  double ar_mean = 0.0, ar_std = 0.0;
  double f1_mean = 0.0, f1_std = 0.0;
  double miou_mean = 0.0, miou_std = 0.0;
  double separation_mean = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // beta-major, then seed order
  std::vector<SweepSummary> summary;
};

// One training run per (beta, seed) with cfg.beta and cfg.seed replaced; the
// selected checkpoint is scored on eval_set. Throws unless betas and seeds
// are nonempty.
SweepResult beta_sweep(const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                       const std::vector<Sample>& eval_set, const std::vector<double>& betas,
                       const std::vector<std::uint64_t>& seeds, const TrainConfig& cfg,
                       std::ostream* log = nullptr);

// "beta,seed,ap,ar,f1,miou" then one line per row.
std::string sweep_csv(const SweepResult& result);
// Whitespace-separated columns for plotting: beta and mean/std per score.
std::string sweep_plot_data(const SweepResult& result);

std::vector<SweepSummary> summarize_sweep(const std::vector<SweepRow>& rows);

}  // namespace footseg::train
