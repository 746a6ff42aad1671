#include "footseg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "footseg/losses.hpp"
#include "footseg/net/layers.hpp"
#include "footseg/net/model.hpp"
#include "footseg/weights.hpp"
#include "footseg/components.hpp"

namespace footseg::gradcheck {
namespace {

using net::Tensor;

constexpr double kStep = 1e-4;

double central(const std::function<double()>& f, double& x) {
  const double saved = x;
  x = saved + kStep;
  const double up = f();
  x = saved - kStep;
  const double down = f();
  x = saved;
  return (up - down) / (2.0 * kStep);
}

struct Probe {
  explicit Probe(std::string name, double tolerance) { result.name = std::move(name), result.tolerance = tolerance; }
  void add(double analytic, double numeric) {
    ++result.probes;
    result.max_relative_error = std::max(result.max_relative_error, relative_error(analytic, numeric));
  }
  CheckResult result;
};

BinaryMask random_mask(int w, int h, std::mt19937_64& rng) {
  // Two rectangles so the boundary map has a non-trivial gap region.
  BinaryMask m(w, h);
  std::uniform_int_distribution<int> side(3, w / 3);
  for (int r = 0; r < 2; ++r) {
    const int sw = side(rng), sh = side(rng);
    const int x0 = r == 0 ? 0 : w - sw;
    const int y0 = std::uniform_int_distribution<int>(0, h - sh)(rng);
    for (int y = y0; y < y0 + sh; ++y)
      for (int x = x0; x < x0 + sw; ++x) m(x, y) = 1;
  }
  return m;
}

std::vector<double> uniform_values(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

template <typename F>
void for_probes(std::size_t size, int count, std::mt19937_64& rng, F&& body) {
  std::uniform_int_distribution<std::size_t> pick(0, size - 1);
  for (int i = 0; i < count; ++i) body(pick(rng));
}

CheckResult check_fbeta(FBetaVariant variant, const char* name, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Probe probe(name, kPerOpTolerance);
  for (double beta : {0.1, 0.5, 1.0, 4.0}) {
    const BinaryMask y = random_mask(12, 10, rng);
    std::vector<double> yhat = uniform_values(y.size(), 0.0, 1.0, rng);
    const FBetaForm form{variant, beta, 1.0};
    const std::vector<double> g = fbeta_grad(y, yhat, form);
    for_probes(y.size(), 12, rng, [&](std::size_t k) {
      probe.add(g[k], central([&] { return fbeta_measure(y, yhat, form); }, yhat[k]));
    });
  }
  return probe.result;
}

struct LogitCase {
  BinaryMask y;
  std::vector<double> bg, fg;
  WeightMap weights;
};

LogitCase logit_case(std::mt19937_64& rng) {
  LogitCase c;
  c.y = random_mask(14, 12, rng);
  c.bg = uniform_values(c.y.size(), -3.0, 3.0, rng);
  c.fg = uniform_values(c.y.size(), -3.0, 3.0, rng);
  c.weights = compute_weight_maps(connected_components(c.y), WeightParams{}).exponentiated;
  return c;
}

void check_logit_objective(Probe& probe, LogitCase& c, const ObjectiveSpec& spec, std::mt19937_64& rng) {
  const int w = c.y.width(), h = c.y.height();
  auto loss = [&] {
    return evaluate_objective(c.y, Prediction::from_logits(w, h, c.bg, c.fg), &c.weights, spec).total;
  };
  LogitGrad g;
  evaluate_objective(c.y, Prediction::from_logits(w, h, c.bg, c.fg), &c.weights, spec, &g);
  for_probes(c.y.size(), 12, rng, [&](std::size_t k) {
    probe.add(g.background[k], central(loss, c.bg[k]));
    probe.add(g.building[k], central(loss, c.fg[k]));
  });
}

Tensor<double> random_tensor(int n, int c, int h, int w, std::mt19937_64& rng) {
  Tensor<double> t(n, c, h, w);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (double& v : t.values()) v = d(rng);
  return t;
}

double dot(const Tensor<double>& a, const Tensor<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
  return s;
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

CheckResult check_fbeta_standard(std::uint64_t seed) {
  return check_fbeta(FBetaVariant::standard, "fbeta_standard", seed);
}

CheckResult check_fbeta_literal(std::uint64_t seed) {
  return check_fbeta(FBetaVariant::literal, "fbeta_literal", seed);
}

CheckResult check_weighted_cross_entropy(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Probe probe("weighted_cross_entropy", kPerOpTolerance);
  for (int rep = 0; rep < 3; ++rep) {
    LogitCase c = logit_case(rng);
    check_logit_objective(probe, c, ObjectiveSpec{true, false, {}}, rng);
  }
  return probe.result;
}

CheckResult check_combined_objective(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Probe probe("combined_objective", kPerOpTolerance);
  for (double beta : {0.1, 1.0, 4.0}) {
    for (FBetaVariant v : {FBetaVariant::standard, FBetaVariant::literal}) {
      LogitCase c = logit_case(rng);
      check_logit_objective(probe, c, ObjectiveSpec{true, true, {v, beta, 1.0}}, rng);
    }
  }
  return probe.result;
}

CheckResult check_conv2d(int dilation, int stride, int kernel, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Probe probe("conv2d_k" + std::to_string(kernel) + "_s" + std::to_string(stride) + "_d" + std::to_string(dilation),
              kPerOpTolerance);
  const net::ConvSpec spec{3, 4, kernel, stride, dilation};
  Tensor<double> x = random_tensor(2, 3, 11, 13, rng);
  std::vector<double> w = uniform_values(spec.weight_count(), -1.0, 1.0, rng);
  std::vector<double> b = uniform_values(4, -1.0, 1.0, rng);
  const Tensor<double> y0 = net::conv2d_forward<double>(x, spec, w, b);
  const Tensor<double> r = random_tensor(y0.n(), y0.c(), y0.h(), y0.w(), rng);
  auto loss = [&] { return dot(net::conv2d_forward<double>(x, spec, w, b), r); };
  const net::ConvGrads<double> g = net::conv2d_backward<double>(r, x, spec, w);
  for_probes(x.size(), 20, rng, [&](std::size_t k) { probe.add(g.grad_x.values()[k], central(loss, x.values()[k])); });
  for_probes(w.size(), 20, rng, [&](std::size_t k) { probe.add(g.grad_w[k], central(loss, w[k])); });
  for (std::size_t k = 0; k < b.size(); ++k) probe.add(g.grad_b[k], central(loss, b[k]));
  return probe.result;
}

CheckResult check_bilinear_upsample(int factor, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Probe probe("bilinear_upsample_x" + std::to_string(factor), kPerOpTolerance);
  Tensor<double> x = random_tensor(2, 2, 5, 7, rng);
  const Tensor<double> y0 = net::bilinear_upsample(x, factor);
  const Tensor<double> r = random_tensor(y0.n(), y0.c(), y0.h(), y0.w(), rng);
  auto loss = [&] { return dot(net::bilinear_upsample(x, factor), r); };
  const Tensor<double> g = net::bilinear_upsample_backward(r, factor);
  for (std::size_t k = 0; k < x.size(); ++k) probe.add(g.values()[k], central(loss, x.values()[k]));
  return probe.result;
}

CheckResult check_end_to_end(bool dilated, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Probe probe(dilated ? "minisegnet_dilated" : "minisegnet_plain", kEndToEndTolerance);
  net::NetConfig cfg;
  cfg.dilated = dilated;
  net::MiniSegNet<double> model(cfg);
  model.initialize(seed);
  // A zero classifier would zero every upstream gradient.
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (double& v : model.layers()[net::kClassifier].weight) v = d(rng);
  for (double& v : model.layers()[net::kClassifier].bias) v = d(rng);

  Tensor<double> x(2, 3, 16, 16);
  std::uniform_real_distribution<double> pix(0.0, 1.0);
  for (double& v : x.values()) v = pix(rng);
  std::vector<BinaryMask> masks{random_mask(16, 16, rng), random_mask(16, 16, rng)};
  std::vector<WeightMap> weights;
  for (const auto& m : masks) weights.push_back(compute_weight_maps(connected_components(m), WeightParams{}).exponentiated);
  const ObjectiveSpec spec{true, true, {FBetaVariant::standard, 0.5, 1.0}};

  auto objective = [&](const Tensor<double>& logits, Tensor<double>* grad) {
    double total = 0.0;
    if (grad) *grad = Tensor<double>(logits.n(), 2, logits.h(), logits.w());
    const std::size_t n = logits.plane_size();
    for (int i = 0; i < logits.n(); ++i) {
      std::vector<double> bg(logits.plane(i, 0), logits.plane(i, 0) + n);
      std::vector<double> fg(logits.plane(i, 1), logits.plane(i, 1) + n);
      LogitGrad g;
      total += evaluate_objective(masks[static_cast<std::size_t>(i)], Prediction::from_logits(16, 16, bg, fg),
                                  &weights[static_cast<std::size_t>(i)], spec, grad ? &g : nullptr)
                   .total;
      if (grad) {
        std::copy(g.background.begin(), g.background.end(), grad->plane(i, 0));
        std::copy(g.building.begin(), g.building.end(), grad->plane(i, 1));
      }
    }
    return total;
  };

  net::ForwardCache<double> cache;
  Tensor<double> grad_logits;
  objective(model.forward(x, &cache), &grad_logits);
  const net::Gradients<double> grads = model.backward(cache, grad_logits);
  auto loss = [&] { return objective(model.forward(x), nullptr); };

  // Central differences are only valid where no ReLU changes state inside
  // [theta - h, theta + h]; probes that straddle a kink are redrawn.
  auto pattern = [&] {
    net::ForwardCache<double> c;
    model.forward(x, &c);
    std::vector<bool> active;
    for (const auto* t : {&c.stem, &c.down, &c.dil_a, &c.dil_b, &c.rate1, &c.rate2, &c.rate4, &c.point, &c.fused,
                          &c.skip, &c.decoded})
      for (double v : t->values()) active.push_back(v > 0.0);
    return active;
  };
  const std::vector<bool> base = pattern();
  std::uniform_int_distribution<std::size_t> layer_pick(0, model.layers().size() - 1);
  for (int attempt = 0; probe.result.probes < 10 && attempt < 200; ++attempt) {
    const std::size_t li = layer_pick(rng);
    auto& layer = model.layers()[li];
    const bool bias = std::uniform_int_distribution<int>(0, 3)(rng) == 0;
    auto& values = bias ? layer.bias : layer.weight;
    const auto& analytic = bias ? grads[li].bias : grads[li].weight;
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(rng);
    const double saved = values[k];
    values[k] = saved + kStep;
    const bool up_same = pattern() == base;
    values[k] = saved - kStep;
    const bool down_same = pattern() == base;
    values[k] = saved;
    if (!up_same || !down_same) {
      ++probe.result.skipped;
      continue;
    }
    probe.add(analytic[k], central(loss, values[k]));
  }
  return probe.result;
}

std::vector<CheckResult> run_all(std::uint64_t seed) {
  std::vector<CheckResult> out;
  out.push_back(check_fbeta_standard(seed));
  out.push_back(check_fbeta_literal(seed + 1));
  out.push_back(check_weighted_cross_entropy(seed + 2));
  out.push_back(check_combined_objective(seed + 3));
  for (int d : {1, 2, 4}) {
    out.push_back(check_conv2d(d, 1, 3, seed + 10 + static_cast<std::uint64_t>(d)));
    out.push_back(check_conv2d(d, 2, 3, seed + 20 + static_cast<std::uint64_t>(d)));
  }
  out.push_back(check_conv2d(1, 1, 1, seed + 30));
  out.push_back(check_bilinear_upsample(1, seed + 40));
  out.push_back(check_bilinear_upsample(2, seed + 41));
  out.push_back(check_bilinear_upsample(3, seed + 42));
  out.push_back(check_end_to_end(true, seed + 50));
  out.push_back(check_end_to_end(false, seed + 51));
  return out;
}

}  // namespace footseg::gradcheck
