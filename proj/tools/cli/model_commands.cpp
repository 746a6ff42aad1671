#include <cstdio>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "footseg/gradcheck.hpp"
#include "footseg/io.hpp"
#include "footseg/net/checkpoint.hpp"
#include "footseg/train/trainer.hpp"

namespace footseg::cli {
namespace fs = std::filesystem;

namespace {

std::string history_csv(const train::TrainResult& r) {
  std::string out = "epoch,train_loss,val_loss,precision,recall,f1,miou\n";
  char buf[256];
  for (const auto& e : r.history) {
    std::snprintf(buf, sizeof buf, "%d,%.8f,%.8f,%.6f,%.6f,%.6f,%.6f\n", e.epoch, e.train_loss, e.val_loss,
                  e.val_metrics.precision, e.val_metrics.recall, e.val_metrics.f1, e.val_metrics.miou);
    out += buf;
  }
  return out;
}

std::string metrics_line(const std::string& label, const MetricsReport& m, double separation) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "  %-16s P=%.4f R=%.4f F1=%.4f mIoU=%.4f sep=%.3f", label.c_str(), m.precision,
                m.recall, m.f1, m.miou, separation);
  return buf;
}

// AP, AR, F-1, mIoU, building IoU (mean +- std over images), in percent.
std::string table5_line(const MetricsReport& m) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "\n  %8s %8s %8s %8s %16s\n  %8.1f %8.1f %8.1f %8.1f %9.1f +-%5.1f", "AP", "AR",
                "F-1", "mIoU", "IoU(building)", 100 * m.precision, 100 * m.recall, 100 * m.f1, 100 * m.miou,
                100 * m.iou_building_mean, 100 * m.iou_building_std);
  return buf;
}

void require_splits(const SplitSamples& s, const std::string& name) {
  if (s.train.empty() || s.val.empty())
    throw ValidationError(name + ": too few samples for a train/val split (" + std::to_string(s.train.size()) +
                          " train, " + std::to_string(s.val.size()) + " val)");
}

}  // namespace

void register_train(CLI::App& app, Registry& registry) {
  auto* sub = app.add_subcommand(
      "train", "Train MiniSegNet on one dataset, or cross-dataset (combined phase, then per-dataset fine-tune)");
  struct Opts {
    CommonOptions common;
    DataFlags data;
    TrainFlags train;
    train::Schedule schedule;
  };
  auto o = std::make_shared<Opts>();
  add_data_flags(sub, o->data);
  add_train_flags(sub, o->train);
  sub->add_option("--phase1", o->schedule.phase1_enabled, "Cross-dataset: run the combined-set phase")
      ->capture_default_str();
  sub->add_option("--phase1-epochs", o->schedule.phase1_epochs, "Cross-dataset: combined-set epochs")
      ->capture_default_str();
  sub->add_option("--phase2-epochs", o->schedule.phase2_epochs, "Cross-dataset: per-dataset fine-tune epochs")
      ->capture_default_str();
  sub->add_option("--target", o->schedule.target, "Cross-dataset: combined-set sample size")->capture_default_str();
  sub->add_option("--fractions", o->schedule.fractions, "Cross-dataset: inclusion fraction per dataset, in order")
      ->delimiter(',');
  add_common_options(sub, o->common, true,
                     "Output directory (checkpoints *.mseg, log.ndjson, history CSV, config.txt)");
  registry.commands.emplace_back(sub, [=] {
    const train::TrainConfig cfg = make_train_config(o->train, o->common.seed);
    const auto datasets = load_datasets(o->data, o->common.seed);
    const fs::path dir = prepare_out_dir(o->common.out);
    std::ofstream log(dir / "log.ndjson", std::ios::binary);
    Report rep{"train"};
    rep.summary["loss"] = train::loss_label(cfg.loss, cfg.beta);
    rep.summary["seed"] = cfg.seed;

    if (datasets.size() == 1) {
      const SplitSamples split = split_samples(datasets[0].samples, cfg.seed);
      require_splits(split, datasets[0].name);
      write_text_file(dir / "config.txt", train::format_config(cfg));
      const train::TrainResult r = train::train(split.train, split.val, cfg, {nullptr, &log, datasets[0].name});
      net::save_checkpoint(dir / "best.mseg", r.best_model);
      net::save_checkpoint(dir / "final.mseg", r.final_model);
      write_text_file(dir / "history.csv", history_csv(r));
      rep.summary["dataset"] = datasets[0].name;
      rep.summary["best_epoch"] = r.best_epoch;
      rep.summary["val"] = metrics_to_json(r.history[static_cast<std::size_t>(r.best_epoch - 1)].val_metrics);
      if (!split.test.empty()) {
        const train::EvalResult test = train::evaluate(r.best_model, split.test, cfg);
        rep.summary["test"] = metrics_to_json(test.metrics);
        rep.summary["test"]["separation_rate"] = test.separation_rate;
        rep.table.push_back(metrics_line("test", test.metrics, test.separation_rate));
      }
      rep.artifacts = {(dir / "best.mseg").string(), (dir / "final.mseg").string(), (dir / "history.csv").string(),
                       (dir / "log.ndjson").string(), (dir / "config.txt").string()};
      return rep;
    }

    std::vector<train::SuiteData> suites;
    std::vector<std::vector<Sample>> tests;
    for (const auto& d : datasets) {
      SplitSamples split = split_samples(d.samples, cfg.seed);
      require_splits(split, d.name);
      suites.push_back({d.name, std::move(split.train), std::move(split.val)});
      tests.push_back(std::move(split.test));
    }
    o->schedule.validate(suites.size());
    write_text_file(dir / "config.txt", train::format_config(cfg, &o->schedule));
    const train::CrossDatasetResult r = train::cross_dataset_train(suites, o->schedule, cfg, &log);
    if (r.phase1) {
      net::save_checkpoint(dir / "phase1.mseg", r.phase1->best_model);
      write_text_file(dir / "phase1_history.csv", history_csv(*r.phase1));
      rep.summary["phase1_best_epoch"] = r.phase1->best_epoch;
      rep.artifacts.push_back((dir / "phase1.mseg").string());
    }
    ojson per_suite = ojson::object();
    for (std::size_t i = 0; i < suites.size(); ++i) {
      const auto& tr = r.per_suite[i];
      const fs::path ckpt = dir / (suites[i].name + ".mseg");
      net::save_checkpoint(ckpt, tr.best_model);
      write_text_file(dir / (suites[i].name + "_history.csv"), history_csv(tr));
      ojson entry{{"best_epoch", tr.best_epoch}};
      if (!tests[i].empty()) {
        const train::EvalResult test = train::evaluate(tr.best_model, tests[i], cfg);
        entry["test"] = metrics_to_json(test.metrics);
        entry["test"]["separation_rate"] = test.separation_rate;
        rep.table.push_back(metrics_line(suites[i].name, test.metrics, test.separation_rate));
      }
      per_suite[suites[i].name] = entry;
      rep.artifacts.push_back(ckpt.string());
    }
    rep.summary["suites"] = per_suite;
    rep.artifacts.push_back((dir / "log.ndjson").string());
    rep.artifacts.push_back((dir / "config.txt").string());
    return rep;
  });
}

void register_eval(CLI::App& app, Registry& registry) {
  auto* sub = app.add_subcommand("eval", "Score predicted masks, or a checkpoint on a dataset");
  struct Opts {
    CommonOptions common;
    DataFlags data;
    std::string pred, gt, checkpoint, split = "test", loss = "ewc+f";
    double beta = 1.0;
  };
  auto o = std::make_shared<Opts>();
  auto* pred = sub->add_option("--pred", o->pred, "Predicted binary mask image")->check(CLI::ExistingFile);
  auto* gt = sub->add_option("--gt", o->gt, "Ground-truth binary mask image")->check(CLI::ExistingFile);
  pred->needs(gt);
  gt->needs(pred);
  auto* ckpt = sub->add_option("--checkpoint", o->checkpoint, "Model checkpoint (.mseg)")->check(CLI::ExistingFile);
  ckpt->excludes(pred);
  add_data_flags(sub, o->data);
  sub->add_option("--split", o->split, "Checkpoint mode: which seeded split to score")
      ->check(CLI::IsMember({"all", "train", "val", "test"}))
      ->capture_default_str();
  sub->add_option("--loss", o->loss, "Checkpoint mode: objective reported as 'loss'")->capture_default_str();
  sub->add_option("--beta", o->beta, "Checkpoint mode: F-Beta beta of the reported objective")
      ->capture_default_str();
  add_common_options(sub, o->common, false, "Optional output directory (report.json, predicted masks)");
  registry.commands.emplace_back(sub, [=] {
    Report rep{"eval"};
    if (!o->pred.empty()) {
      const BinaryMask p = io::read_mask(o->pred);
      const BinaryMask g = io::read_mask(o->gt);
      if (!p.same_shape(g)) throw ValidationError("--pred and --gt sizes differ");
      const ConfusionCounts counts = accumulate(g, p);
      const MetricsReport m = compute_report(std::span<const ConfusionCounts>(&counts, 1));
      rep.summary = metrics_to_json(m);
      rep.table.push_back(table5_line(m));
    } else {
      if (o->checkpoint.empty()) throw ValidationError("give --pred/--gt or --checkpoint with a dataset");
      const net::MiniSegNet<float> model = net::load_checkpoint(o->checkpoint);
      train::TrainConfig cfg;
      cfg.loss = train::parse_loss_mode(o->loss);
      cfg.beta = o->beta;
      cfg.validate();
      const auto datasets = load_datasets(o->data, o->common.seed);
      if (datasets.size() != 1) throw ValidationError("eval scores one dataset at a time");
      const SplitSamples split = split_samples(datasets[0].samples, o->common.seed);
      const std::vector<Sample>& samples = o->split == "all"     ? datasets[0].samples
                                           : o->split == "train" ? split.train
                                           : o->split == "val"   ? split.val
                                                                 : split.test;
      if (samples.empty()) throw ValidationError("split '" + o->split + "' is empty");
      const train::EvalResult r = train::evaluate(model, samples, cfg);
      rep.summary = metrics_to_json(r.metrics);
      rep.summary["separation_rate"] = r.separation_rate;
      rep.summary["loss"] = r.loss;
      rep.summary["samples"] = samples.size();
      rep.table.push_back(table5_line(r.metrics));
      if (!o->common.out.empty()) {
        const fs::path dir = prepare_out_dir(o->common.out);
        fs::create_directories(dir / "pred");
        const auto masks = train::predict_masks(model, samples);
        for (std::size_t i = 0; i < masks.size(); ++i) io::write_mask(dir / "pred" / (samples[i].id + ".png"), masks[i]);
        rep.artifacts.push_back((dir / "pred").string());
      }
    }
    if (!o->common.out.empty()) {
      const fs::path dir = prepare_out_dir(o->common.out);
      write_text_file(dir / "report.json", rep.summary.dump(2) + "\n");
      rep.artifacts.push_back((dir / "report.json").string());
    }
    return rep;
  });
}

void register_sweep_beta(CLI::App& app, Registry& registry) {
  auto* sub = app.add_subcommand("sweep-beta", "Train one model per (beta, repeat) and tabulate AP/AR/F1/mIoU");
  struct Opts {
    CommonOptions common;
    DataFlags data;
    TrainFlags train;
    std::vector<double> betas{0.1, 0.5, 1.0, 4.0};
    int repeats = 3;
  };
  auto o = std::make_shared<Opts>();
  // Unit-weight cross-entropy keeps the boundary map from masking the beta trend.
  o->train.loss = "bce+f";
  add_data_flags(sub, o->data);
  add_train_flags(sub, o->train);
  sub->add_option("--betas", o->betas, "Beta values")->delimiter(',')->capture_default_str();
  sub->add_option("--repeats", o->repeats, "Runs per beta; run r uses seed + r")->capture_default_str();
  add_common_options(sub, o->common, true, "Output directory (sweep.csv, sweep.dat, log.ndjson)");
  registry.commands.emplace_back(sub, [=] {
    if (o->repeats < 1) throw ValidationError("--repeats must be >= 1");
    const train::TrainConfig cfg = make_train_config(o->train, o->common.seed);
    const auto datasets = load_datasets(o->data, o->common.seed);
    if (datasets.size() != 1) throw ValidationError("sweep-beta runs on exactly one dataset");
    const SplitSamples split = split_samples(datasets[0].samples, o->common.seed);
    require_splits(split, datasets[0].name);
    const std::vector<Sample>& eval_set = split.test.empty() ? split.val : split.test;
    std::vector<std::uint64_t> seeds;
    for (int r = 0; r < o->repeats; ++r) seeds.push_back(o->common.seed + static_cast<std::uint64_t>(r));

    const fs::path dir = prepare_out_dir(o->common.out);
    std::ofstream log(dir / "log.ndjson", std::ios::binary);
    const train::SweepResult result = train::beta_sweep(split.train, split.val, eval_set, o->betas, seeds, cfg, &log);
    write_text_file(dir / "sweep.csv", train::sweep_csv(result));
    write_text_file(dir / "sweep.dat", train::sweep_plot_data(result));

    Report rep{"sweep-beta"};
    rep.summary["dataset"] = datasets[0].name;
    rep.summary["loss"] = train::loss_label(cfg.loss, 0.0).substr(0, train::loss_label(cfg.loss, 0.0).find('('));
    ojson rows = ojson::array();
    rep.table.push_back("  beta    AP mean(std)      AR mean(std)      F1 mean(std)      mIoU mean(std)");
    for (const auto& s : result.summary) {
      rows.push_back({{"beta", s.beta},
                      {"ap_mean", s.ap_mean},
                      {"ap_std", s.ap_std},
                      {"ar_mean", s.ar_mean},
                      {"ar_std", s.ar_std},
                      {"f1_mean", s.f1_mean},
                      {"f1_std", s.f1_std},
                      {"miou_mean", s.miou_mean},
                      {"miou_std", s.miou_std}});
      char buf[200];
      std::snprintf(buf, sizeof buf, "  %-6g  %.4f(%.4f)    %.4f(%.4f)    %.4f(%.4f)    %.4f(%.4f)", s.beta, s.ap_mean,
                    s.ap_std, s.ar_mean, s.ar_std, s.f1_mean, s.f1_std, s.miou_mean, s.miou_std);
      rep.table.push_back(buf);
    }
    rep.summary["summary"] = rows;
    rep.artifacts = {(dir / "sweep.csv").string(), (dir / "sweep.dat").string(), (dir / "log.ndjson").string()};
    return rep;
  });
}

void register_gradcheck(CLI::App& app, Registry& registry) {
  auto* sub = app.add_subcommand("gradcheck", "Finite-difference check of every differentiable operation");
  auto common = std::make_shared<CommonOptions>();
  add_common_options(sub, *common, false, "Optional output directory (gradcheck.json)");
  registry.commands.emplace_back(sub, [=] {
    const auto results = gradcheck::run_all(common->seed);
    Report rep{"gradcheck"};
    ojson checks = ojson::array();
    int failed = 0;
    for (const auto& r : results) {
      checks.push_back({{"name", r.name},
                        {"probes", r.probes},
                        {"skipped", r.skipped},
                        {"max_relative_error", r.max_relative_error},
                        {"tolerance", r.tolerance},
                        {"passed", r.passed()}});
      failed += !r.passed();
      char buf[160];
      std::snprintf(buf, sizeof buf, "  %-26s probes=%-4d max_rel_err=%.3e tol=%.0e %s", r.name.c_str(), r.probes,
                    r.max_relative_error, r.tolerance, r.passed() ? "ok" : "FAIL");
      rep.table.push_back(buf);
    }
    rep.summary = {{"checks", results.size()}, {"failed", failed}, {"results", checks}};
    if (failed) {
      rep.passed = false;
      rep.failure = std::to_string(failed) + " gradient check(s) exceeded tolerance";
    }
    if (!common->out.empty()) {
      const fs::path dir = prepare_out_dir(common->out);
      write_text_file(dir / "gradcheck.json", checks.dump(2) + "\n");
      rep.artifacts.push_back((dir / "gradcheck.json").string());
    }
    return rep;
  });
}

}  // namespace footseg::cli
