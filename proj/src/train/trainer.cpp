#include "footseg/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "footseg/components.hpp"
#include "footseg/losses.hpp"

namespace footseg::train {
namespace {

using json = nlohmann::json;
constexpr std::size_t kEvalChunk = 16;

void emit(std::ostream* log, const json& line) {
  if (log) *log << line.dump() << "\n";
}

json metrics_json(const MetricsReport& m) {
  return {{"precision", m.precision}, {"recall", m.recall},     {"f1", m.f1},
          {"miou", m.miou},           {"iou_building", m.iou_building}};
}

std::vector<const Sample*> pointers(const std::vector<Sample>& samples, std::size_t first, std::size_t count) {
  std::vector<const Sample*> out;
  for (std::size_t i = first; i < first + count; ++i) out.push_back(&samples[i]);
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

std::uint64_t label_hash(const LabelMap& labels) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(labels.width()));
  mix(static_cast<std::uint64_t>(labels.height()));
  for (std::int32_t v : labels.grid().values()) mix(static_cast<std::uint32_t>(v));
  return h;
}

const WeightMap& WeightCache::get(const LabelMap& labels) {
  auto& bucket = maps_[label_hash(labels)];
  for (const auto& [key, map] : bucket)
    if (key == labels) return map;
  ++computed_;
  bucket.emplace_back(labels, compute_weight_maps(labels, params_).exponentiated);
  return bucket.back().second;
}

int select_checkpoint(const std::vector<EpochRecord>& history) {
  if (history.empty()) throw std::invalid_argument("select_checkpoint: empty history");
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    const auto& a = history[i].val_metrics.miou;
    const auto& b = history[best].val_metrics.miou;
    if (a > b || (a == b && history[i].val_loss < history[best].val_loss)) best = i;
  }
  return history[best].epoch;
}

net::Tensor<float> pack_images(const std::vector<const Sample*>& batch) {
  if (batch.empty()) throw std::invalid_argument("pack_images: empty batch");
  const Image& first = batch.front()->image;
  net::Tensor<float> out(static_cast<int>(batch.size()), first.channels(), first.height(), first.width());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Image& img = batch[i]->image;
    if (img.width() != first.width() || img.height() != first.height() || img.channels() != first.channels())
      throw std::invalid_argument("pack_images: sample '" + batch[i]->id + "' has shape " +
                                  std::to_string(img.channels()) + "x" + std::to_string(img.width()) + "x" +
                                  std::to_string(img.height()) + ", batch expects " +
                                  std::to_string(first.channels()) + "x" + std::to_string(first.width()) + "x" +
                                  std::to_string(first.height()));
    std::copy(img.values().begin(), img.values().end(), out.plane(static_cast<int>(i), 0));
  }
  return out;
}

std::vector<double> building_probabilities(const net::Tensor<float>& logits, int index) {
  const std::size_t n = logits.plane_size();
  const float* bg = logits.plane(index, 0);
  const float* fg = logits.plane(index, 1);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(static_cast<double>(bg[i]) - fg[i]));
  return out;
}

LossSummary batch_objective(const net::Tensor<float>& logits, const std::vector<const Sample*>& batch,
                       const TrainConfig& cfg, WeightCache* cache, net::Tensor<float>* grad) {
  if (logits.n() != static_cast<int>(batch.size()) || logits.c() != 2)
    throw std::invalid_argument("batch_objective: logits " + logits.shape_string() + " do not match batch");
  if (uses_weight_map(cfg.loss) && !cache) throw std::invalid_argument("batch_objective: weight cache required");
  if (grad) *grad = net::Tensor<float>(logits.n(), logits.c(), logits.h(), logits.w());

  const ObjectiveSpec spec = cfg.objective();
  const std::size_t n = logits.plane_size();
  const double scale = 1.0 / static_cast<double>(batch.size());
  LossSummary sum;
  std::vector<double> bg(n), fg(n);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Sample& s = *batch[b];
    if (s.labels.width() != logits.w() || s.labels.height() != logits.h())
      throw std::invalid_argument("batch_objective: labels of '" + s.id + "' do not match logits");
    const int bi = static_cast<int>(b);
    std::copy(logits.plane(bi, 0), logits.plane(bi, 0) + n, bg.begin());
    std::copy(logits.plane(bi, 1), logits.plane(bi, 1) + n, fg.begin());
    const Prediction pred = Prediction::from_logits(logits.w(), logits.h(), bg, fg);
    const BinaryMask mask = s.labels.to_mask();
    const WeightMap* weights = uses_weight_map(cfg.loss) ? &cache->get(s.labels) : nullptr;
    LogitGrad g;
    const LossTerms terms = evaluate_objective(mask, pred, weights, spec, grad ? &g : nullptr);
    sum.total += terms.total;
    sum.wce += terms.wce;
    sum.fbeta += terms.fbeta;
    if (grad) {
      float* gb = grad->plane(bi, 0);
      float* gf = grad->plane(bi, 1);
      for (std::size_t i = 0; i < n; ++i) {
        gb[i] = static_cast<float>(g.background[i] * scale);
        gf[i] = static_cast<float>(g.building[i] * scale);
      }
    }
  }
  return {sum.wce * scale, sum.fbeta * scale, sum.total * scale};
}

double separation_rate(const std::vector<BinaryMask>& predicted, const std::vector<Sample>& samples) {
  if (predicted.size() != samples.size() || samples.empty())
    throw std::invalid_argument("separation_rate: prediction and sample counts differ or are zero");
  std::size_t matched = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int truth = connected_components(samples[i].labels.to_mask()).component_count();
    if (connected_components(predicted[i]).component_count() == truth) ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(samples.size());
}

std::vector<BinaryMask> predict_masks(const net::MiniSegNet<float>& model, const std::vector<Sample>& samples) {
  std::vector<BinaryMask> out;
  for (std::size_t first = 0; first < samples.size(); first += kEvalChunk) {
    const std::size_t count = std::min(kEvalChunk, samples.size() - first);
    const net::Tensor<float> logits = model.forward(pack_images(pointers(samples, first, count)));
    for (int i = 0; i < static_cast<int>(count); ++i)
      out.push_back(threshold(building_probabilities(logits, i), logits.w(), logits.h()));
  }
  return out;
}

EvalResult evaluate(const net::MiniSegNet<float>& model, const std::vector<Sample>& samples, const TrainConfig& cfg,
                    WeightCache* cache) {
  if (samples.empty()) throw std::invalid_argument("evaluate: empty sample list");
  WeightCache local(cfg.weights);
  if (!cache) cache = &local;
  EvalResult out;
  std::vector<ConfusionCounts> counts;
  std::vector<BinaryMask> predicted;
  LossSummary sum;
  for (std::size_t first = 0; first < samples.size(); first += kEvalChunk) {
    const std::size_t count = std::min(kEvalChunk, samples.size() - first);
    const auto batch = pointers(samples, first, count);
    const net::Tensor<float> logits = model.forward(pack_images(batch));
    const LossSummary part = batch_objective(logits, batch, cfg, cache, nullptr);
    sum.wce += part.wce * static_cast<double>(count);
    sum.fbeta += part.fbeta * static_cast<double>(count);
    sum.total += part.total * static_cast<double>(count);
    for (int i = 0; i < static_cast<int>(count); ++i) {
      predicted.push_back(threshold(building_probabilities(logits, i), logits.w(), logits.h()));
      counts.push_back(accumulate(batch[static_cast<std::size_t>(i)]->labels.to_mask(), predicted.back()));
    }
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  out.terms = {sum.wce * inv, sum.fbeta * inv, sum.total * inv};
  out.loss = out.terms.total;
  out.metrics = compute_report(counts);
  out.separation_rate = separation_rate(predicted, samples);
  return out;
}

TrainResult train(const std::vector<Sample>& train_set, const std::vector<Sample>& val_set, const TrainConfig& cfg,
                  const TrainOptions& options) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training split");
  if (val_set.empty()) throw std::invalid_argument("train: empty validation split");
  for (const auto* set : {&train_set, &val_set})
    for (const auto& s : *set)
      for (float v : s.image.values())
        if (!std::isfinite(v)) throw std::invalid_argument("train: sample '" + s.id + "' has a non-finite pixel");

  net::NetConfig net_cfg;
  net_cfg.in_channels = train_set.front().image.channels();
  net_cfg.dilated = cfg.dilated;
  net::MiniSegNet<float> model(net_cfg);
  if (options.init) {
    model = *options.init;
  } else {
    model.initialize(cfg.seed);
  }

  WeightCache cache(cfg.weights);
  if (uses_weight_map(cfg.loss)) {
    for (const auto& s : train_set) cache.get(s.labels);
    for (const auto& s : val_set) cache.get(s.labels);
  }

  TrainResult result;
  result.best_model = model;
  std::vector<std::size_t> order(train_set.size());
  const std::size_t batch_size = static_cast<std::size_t>(cfg.batch_size);
  emit(options.log, {{"event", "start"},
                     {"run", options.run_name},
                     {"loss", loss_label(cfg.loss, cfg.beta)},
                     {"seed", cfg.seed},
                     {"epochs", cfg.epochs},
                     {"train_samples", train_set.size()},
                     {"val_samples", val_set.size()},
                     {"parameters", model.parameter_count()}});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);

    LossSummary epoch_terms;
    std::size_t batch_id = 0;
    for (std::size_t first = 0; first < order.size(); first += batch_size, ++batch_id) {
      std::vector<const Sample*> batch;
      for (std::size_t i = first; i < std::min(order.size(), first + batch_size); ++i)
        batch.push_back(&train_set[order[i]]);
      net::ForwardCache<float> fc;
      const net::Tensor<float> logits = model.forward(pack_images(batch), &fc);
      net::Tensor<float> grad;
      const LossSummary terms = batch_objective(logits, batch, cfg, &cache, &grad);
      const double loss = terms.total;
      if (!std::isfinite(loss)) {
        emit(options.log, {{"event", "diverged"}, {"run", options.run_name}, {"epoch", epoch}, {"batch", batch_id}});
        throw TrainingDiverged(epoch, batch_id,
                               "training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(batch_id));
      }
      net::sgd_step(model, model.backward(fc, grad), cfg.lr, cfg.l2);
      result.step_losses.push_back(loss);
      const double weight = static_cast<double>(batch.size());
      epoch_terms.wce += terms.wce * weight;
      epoch_terms.fbeta += terms.fbeta * weight;
      epoch_terms.total += terms.total * weight;
    }
    const double inv = 1.0 / static_cast<double>(train_set.size());
    epoch_terms = {epoch_terms.wce * inv, epoch_terms.fbeta * inv, epoch_terms.total * inv};

    const EvalResult val = evaluate(model, val_set, cfg, &cache);
    EpochRecord rec{epoch, epoch_terms.total, val.loss, epoch_terms, val.terms, val.metrics};
    result.history.push_back(rec);
    if (select_checkpoint(result.history) == epoch) result.best_model = model;
    for (const auto& [split, t] : {std::pair{"train", epoch_terms}, {"val", val.terms}})
      emit(options.log, {{"event", "loss"},
                         {"run", options.run_name},
                         {"epoch", epoch},
                         {"split", split},
                         {"wce", t.wce},
                         {"fbeta", t.fbeta},
                         {"total", t.total}});
    json line{{"event", "metrics"}, {"run", options.run_name}, {"epoch", epoch}, {"split", "val"}};
    line["metrics"] = metrics_json(val.metrics);
    emit(options.log, line);
  }

  result.best_epoch = select_checkpoint(result.history);
  result.final_model = std::move(model);
  emit(options.log, {{"event", "done"}, {"run", options.run_name}, {"best_epoch", result.best_epoch}});
  return result;
}

CrossDatasetResult cross_dataset_train(const std::vector<SuiteData>& suites, const Schedule& schedule,
                                       const TrainConfig& cfg, std::ostream* log) {
  schedule.validate(suites.size());
  cfg.validate();
  CrossDatasetResult out;
  if (schedule.phase1_enabled) {
    std::vector<DatasetPart> train_parts, val_parts;
    for (std::size_t i = 0; i < suites.size(); ++i) {
      const double fraction = schedule.fractions.empty() ? 1.0 : schedule.fractions[i];
      train_parts.push_back({suites[i].train, fraction});
      val_parts.push_back({suites[i].val, 1.0});
    }
    const CrossDatasetOptions opts{schedule.target, cfg.seed};
    const auto combined_train = build_cross_dataset(train_parts, opts);
    const auto combined_val = build_cross_dataset(val_parts, opts);
    emit(log, {{"event", "combined"}, {"train_samples", combined_train.size()}, {"val_samples", combined_val.size()}});
    TrainConfig phase1 = cfg;
    phase1.epochs = schedule.phase1_epochs;
    out.phase1 = train(combined_train, combined_val, phase1, {nullptr, log, "phase1"});
  }
  TrainConfig phase2 = cfg;
  phase2.epochs = schedule.phase2_epochs;
  for (const auto& suite : suites) {
    const net::MiniSegNet<float>* init = out.phase1 ? &out.phase1->best_model : nullptr;
    out.per_suite.push_back(train(suite.train, suite.val, phase2, {init, log, "phase2:" + suite.name}));
  }
  return out;
}

std::vector<SweepSummary> summarize_sweep(const std::vector<SweepRow>& rows) {
  std::vector<SweepSummary> out;
  std::vector<double> betas;
  for (const auto& r : rows)
    if (std::find(betas.begin(), betas.end(), r.beta) == betas.end()) betas.push_back(r.beta);
  for (double beta : betas) {
    std::vector<double> ap, ar, f1, miou, sep;
    for (const auto& r : rows) {
      if (r.beta != beta) continue;
      ap.push_back(r.ap);
      ar.push_back(r.ar);
      f1.push_back(r.f1);
      miou.push_back(r.miou);
      sep.push_back(r.separation_rate);
    }
    out.push_back({beta, mean(ap), population_std(ap), mean(ar), population_std(ar), mean(f1), population_std(f1),
                   mean(miou), population_std(miou), mean(sep)});
  }
  return out;
}

SweepResult beta_sweep(const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                       const std::vector<Sample>& eval_set, const std::vector<double>& betas,
                       const std::vector<std::uint64_t>& seeds, const TrainConfig& cfg, std::ostream* log) {
  if (betas.empty()) throw std::invalid_argument("beta_sweep: no beta values");
  if (seeds.empty()) throw std::invalid_argument("beta_sweep: no seeds");
  SweepResult out;
  for (double beta : betas) {
    for (std::uint64_t seed : seeds) {
      TrainConfig run = cfg;
      run.beta = beta;
      run.seed = seed;
      std::ostringstream name;
      name << loss_label(run.loss, beta) << "/seed" << seed;
      const TrainResult r = train(train_set, val_set, run, {nullptr, log, name.str()});
      const EvalResult e = evaluate(r.best_model, eval_set, run);
      out.rows.push_back({beta, seed, e.metrics.precision, e.metrics.recall, e.metrics.f1, e.metrics.miou,
                          e.separation_rate});
    }
  }
  out.summary = summarize_sweep(out.rows);
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "beta,seed,ap,ar,f1,miou\n";
  char buf[256];
  for (const auto& r : result.rows) {
    std::snprintf(buf, sizeof buf, "%g,%llu,%.6f,%.6f,%.6f,%.6f\n", r.beta, static_cast<unsigned long long>(r.seed),
                  r.ap, r.ar, r.f1, r.miou);
    out += buf;
  }
  return out;
}

std::string sweep_plot_data(const SweepResult& result) {
  std::string out = "# beta ap_mean ap_std ar_mean ar_std f1_mean f1_std miou_mean miou_std\n";
  char buf[256];
  for (const auto& s : result.summary) {
    std::snprintf(buf, sizeof buf, "%g %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f\n", s.beta, s.ap_mean, s.ap_std,
                  s.ar_mean, s.ar_std, s.f1_mean, s.f1_std, s.miou_mean, s.miou_std);
    out += buf;
  }
  return out;
}

}  // namespace footseg::train
