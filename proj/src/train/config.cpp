#include "footseg/train/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace footseg::train {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string l = lower(v);
  if (l == "true" || l == "1" || l == "yes") return true;
  if (l == "false" || l == "0" || l == "no") return false;
  throw std::invalid_argument("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string beta_text(double beta) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(beta == std::round(beta * 10) / 10 ? 1 : 2);
  os << beta;
  return os.str();
}

}  // namespace

std::string loss_label(LossMode mode, double beta) {
  const std::string f = "F(" + beta_text(beta) + ")";
  switch (mode) {
    case LossMode::bce: return "BCE";
    case LossMode::bce_f: return "BCE+" + f;
    case LossMode::ewc: return "EWC";
    case LossMode::ewc_f: return "EWC+" + f;
    case LossMode::f: return f;
  }
  return "?";
}

std::string loss_mode_name(LossMode mode) {
  switch (mode) {
    case LossMode::bce: return "bce";
    case LossMode::bce_f: return "bce+f";
    case LossMode::ewc: return "ewc";
    case LossMode::ewc_f: return "ewc+f";
    case LossMode::f: return "f";
  }
  return "?";
}

LossMode parse_loss_mode(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "bce") return LossMode::bce;
  if (t == "bce+f") return LossMode::bce_f;
  if (t == "ewc") return LossMode::ewc;
  if (t == "ewc+f") return LossMode::ewc_f;
  if (t == "f") return LossMode::f;
  throw std::invalid_argument("unknown loss mode '" + text + "' (expected bce, bce+f, ewc, ewc+f or f)");
}

bool uses_fbeta(LossMode mode) {
  return mode == LossMode::bce_f || mode == LossMode::ewc_f || mode == LossMode::f;
}
bool uses_cross_entropy(LossMode mode) { return mode != LossMode::f; }
bool uses_weight_map(LossMode mode) { return mode == LossMode::ewc || mode == LossMode::ewc_f; }

TrainConfig TrainConfig::full_scale() {
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.lr = 1e-4;
  return cfg;
}

ObjectiveSpec TrainConfig::objective() const {
  ObjectiveSpec spec;
  spec.cross_entropy = uses_cross_entropy(loss);
  spec.fbeta = uses_fbeta(loss);
  spec.form.variant = fbeta_variant;
  spec.form.beta = beta;
  return spec;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be positive");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw std::invalid_argument("l2 must be non-negative");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
  weights.validate();
}

void Schedule::validate(std::size_t suite_count) const {
  if (suite_count < 2) throw std::invalid_argument("cross-dataset training needs at least two suites");
  if (phase1_enabled && phase1_epochs < 1) throw std::invalid_argument("phase1_epochs must be >= 1");
  if (phase2_epochs < 1) throw std::invalid_argument("phase2_epochs must be >= 1");
  if (target < 4 || target % 4 != 0) throw std::invalid_argument("target must be a positive multiple of 4");
  if (!fractions.empty() && fractions.size() != suite_count)
    throw std::invalid_argument("fractions must list one value per suite");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("fractions must lie in (0, 1]");
}

ConfigValues parse_config_text(const std::string& text) {
  ConfigValues out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = lower(trim(line.substr(0, eq)));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

ConfigValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(path.string() + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_config(const ConfigValues& values, TrainConfig& cfg, Schedule* schedule) {
  for (const auto& [key, v] : values) {
    if (key == "epochs") cfg.epochs = static_cast<int>(to_int(key, v));
    else if (key == "batch_size") cfg.batch_size = static_cast<int>(to_int(key, v));
    else if (key == "lr") cfg.lr = to_double(key, v);
    else if (key == "l2") cfg.l2 = to_double(key, v);
    else if (key == "loss") cfg.loss = parse_loss_mode(v);
    else if (key == "beta") cfg.beta = to_double(key, v);
    else if (key == "fbeta_variant") {
      const std::string l = lower(v);
      if (l == "standard") cfg.fbeta_variant = FBetaVariant::standard;
      else if (l == "literal") cfg.fbeta_variant = FBetaVariant::literal;
      else throw std::invalid_argument("config: fbeta_variant must be standard or literal");
    } else if (key == "w0") cfg.weights.w0 = to_double(key, v);
    else if (key == "sigma") cfg.weights.sigma = to_double(key, v);
    else if (key == "p") cfg.weights.p = to_double(key, v);
    else if (key == "class_balance") {
      const std::string l = lower(v);
      if (l == "uniform") cfg.weights.class_balance = ClassBalance::uniform;
      else if (l == "inverse_frequency") cfg.weights.class_balance = ClassBalance::inverse_frequency;
      else throw std::invalid_argument("config: class_balance must be uniform or inverse_frequency");
    } else if (key == "dilated") cfg.dilated = to_bool(key, v);
    else if (key == "seed") {
      const long long s = to_int(key, v);
      if (s < 0) throw std::invalid_argument("config: seed must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (schedule && key == "phase1") schedule->phase1_enabled = to_bool(key, v);
    else if (schedule && key == "phase1_epochs") schedule->phase1_epochs = static_cast<int>(to_int(key, v));
    else if (schedule && key == "phase2_epochs") schedule->phase2_epochs = static_cast<int>(to_int(key, v));
    else if (schedule && key == "target") schedule->target = static_cast<int>(to_int(key, v));
    else if (schedule && key == "fractions") {
      schedule->fractions.clear();
      std::istringstream in(v);
      std::string item;
      while (std::getline(in, item, ',')) schedule->fractions.push_back(to_double(key, trim(item)));
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
}

std::string format_config(const TrainConfig& cfg, const Schedule* schedule) {
  std::ostringstream os;
  os << "epochs = " << cfg.epochs << "\n"
     << "batch_size = " << cfg.batch_size << "\n"
     << "lr = " << format_double(cfg.lr) << "\n"
     << "l2 = " << format_double(cfg.l2) << "\n"
     << "loss = " << loss_mode_name(cfg.loss) << "\n"
     << "beta = " << format_double(cfg.beta) << "\n"
     << "fbeta_variant = " << (cfg.fbeta_variant == FBetaVariant::standard ? "standard" : "literal") << "\n"
     << "w0 = " << format_double(cfg.weights.w0) << "\n"
     << "sigma = " << format_double(cfg.weights.sigma) << "\n"
     << "p = " << format_double(cfg.weights.p) << "\n"
     << "class_balance = "
     << (cfg.weights.class_balance == ClassBalance::uniform ? "uniform" : "inverse_frequency") << "\n"
     << "dilated = " << (cfg.dilated ? "true" : "false") << "\n"
     << "seed = " << cfg.seed << "\n";
  if (schedule) {
    os << "phase1 = " << (schedule->phase1_enabled ? "true" : "false") << "\n"
       << "phase1_epochs = " << schedule->phase1_epochs << "\n"
       << "phase2_epochs = " << schedule->phase2_epochs << "\n"
       << "target = " << schedule->target << "\n";
    if (!schedule->fractions.empty()) {
      os << "fractions = ";
      for (std::size_t i = 0; i < schedule->fractions.size(); ++i)
        os << (i ? "," : "") << format_double(schedule->fractions[i]);
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace footseg::train
