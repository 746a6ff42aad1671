#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "footseg/gradcheck.hpp"
#include "footseg/net/checkpoint.hpp"
#include "footseg/net/layers.hpp"
#include "footseg/net/model.hpp"
#include "footseg/simd/kernels.hpp"
#include "oracles.hpp"

using namespace footseg::net;
namespace simd = footseg::simd;

namespace {

template <typename T>
void fill_random(std::span<T> v, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& x : v) x = static_cast<T>(u(rng));
}

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(Conv2d, OneByOneIdentity) {
  std::mt19937_64 rng(1);
  Tensor<double> x(2, 3, 5, 4);
  fill_random(x.values(), rng);
  ConvSpec spec{3, 3, 1, 1, 1};
  std::vector<double> w(9, 0.0), b(3, 0.0);
  for (int c = 0; c < 3; ++c) w[static_cast<std::size_t>(c * 3 + c)] = 1.0;
  EXPECT_EQ(conv2d_forward<double>(x, spec, w, b), x);
}

TEST(Conv2d, DilatedImpulseResponse) {
  Tensor<double> x(1, 1, 9, 9);
  x.at(0, 0, 4, 4) = 1.0;
  ConvSpec spec{1, 1, 3, 1, 2};
  std::vector<double> w(9, 1.0), b(1, 0.0);
  const auto y = conv2d_forward<double>(x, spec, w, b);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c) {
      const bool tap = (r == 2 || r == 4 || r == 6) && (c == 2 || c == 4 || c == 6);
      EXPECT_EQ(y.at(0, 0, r, c), tap ? 1.0 : 0.0) << r << "," << c;
    }
}

TEST(Conv2d, MatchesNaiveConvolution) {
  std::mt19937_64 rng(2);
  for (int kernel : {1, 3})
    for (int stride : {1, 2})
      for (int dilation : {1, 2, 4}) {
        if (kernel == 1 && dilation > 1) continue;
        const int n = 2, cin = 3, cout = 4, h = 11, w = 10;
        Tensor<double> x(n, cin, h, w);
        fill_random(x.values(), rng);
        ConvSpec spec{cin, cout, kernel, stride, dilation};
        std::vector<double> wt(spec.weight_count()), b(static_cast<std::size_t>(cout));
        fill_random<double>(wt, rng);
        fill_random<double>(b, rng);
        int oh = 0, ow = 0;
        const auto want = oracle::naive_conv(to_vec(x.values()), n, cin, h, w, wt, b, cout, kernel, stride,
                                             dilation, &oh, &ow);
        const auto got = conv2d_forward<double>(x, spec, wt, b);
        ASSERT_EQ(got.h(), oh);
        ASSERT_EQ(got.w(), ow);
        for (std::size_t i = 0; i < want.size(); ++i) ASSERT_NEAR(got.values()[i], want[i], 1e-12);
      }
}

TEST(Conv2d, ZeroUpstreamGradientGivesZeroGradients) {
  std::mt19937_64 rng(3);
  Tensor<double> x(1, 2, 6, 6);
  fill_random(x.values(), rng);
  ConvSpec spec{2, 3, 3, 1, 2};
  std::vector<double> wt(spec.weight_count());
  fill_random<double>(wt, rng);
  const auto g = conv2d_backward<double>(Tensor<double>(1, 3, 6, 6), x, spec, wt);
  for (double v : g.grad_x.values()) EXPECT_EQ(v, 0.0);
  for (double v : g.grad_w) EXPECT_EQ(v, 0.0);
  for (double v : g.grad_b) EXPECT_EQ(v, 0.0);
}

TEST(Conv2d, BiasGradientIsChannelSum) {
  std::mt19937_64 rng(4);
  Tensor<double> x(3, 2, 6, 6), go(3, 4, 3, 3);
  fill_random(x.values(), rng);
  fill_random(go.values(), rng);
  ConvSpec spec{2, 4, 3, 2, 1};
  std::vector<double> wt(spec.weight_count());
  fill_random<double>(wt, rng);
  const auto g = conv2d_backward<double>(go, x, spec, wt);
  for (int c = 0; c < 4; ++c) {
    double sum = 0.0;
    for (int n = 0; n < 3; ++n)
      for (std::size_t i = 0; i < go.plane_size(); ++i) sum += go.plane(n, c)[i];
    EXPECT_NEAR(g.grad_b[static_cast<std::size_t>(c)], sum, 1e-12);
  }
}

TEST(Conv2d, GradientsPassFiniteDifferenceChecks) {
  for (int d : {1, 2, 4}) {
    const auto r = footseg::gradcheck::check_conv2d(d, 1, 3, 21);
    EXPECT_TRUE(r.passed()) << r.name << " " << r.max_relative_error;
  }
  EXPECT_TRUE(footseg::gradcheck::check_conv2d(1, 2, 3, 22).passed());
  EXPECT_TRUE(footseg::gradcheck::check_conv2d(1, 1, 1, 23).passed());
}

TEST(Conv2d, SpecValidation) {
  EXPECT_THROW((ConvSpec{1, 1, 2, 1, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((ConvSpec{0, 1, 3, 1, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((ConvSpec{1, 1, 3, 0, 1}.validate()), std::invalid_argument);
}

TEST(Upsample, ConstantInputStaysConstant) {
  Tensor<double> x(1, 2, 3, 5, 0.75);
  for (int factor : {2, 4}) {
    const auto y = bilinear_upsample(x, factor);
    EXPECT_EQ(y.h(), 3 * factor);
    for (double v : y.values()) EXPECT_DOUBLE_EQ(v, 0.75);
  }
}

TEST(Upsample, FactorOneIsIdentity) {
  std::mt19937_64 rng(5);
  Tensor<double> x(2, 2, 4, 3);
  fill_random(x.values(), rng);
  EXPECT_EQ(bilinear_upsample(x, 1), x);
}

TEST(Upsample, BackwardIsAdjointOfForward) {
  std::mt19937_64 rng(6);
  Tensor<double> x(1, 2, 4, 5), g(1, 2, 8, 10);
  fill_random(x.values(), rng);
  fill_random(g.values(), rng);
  const auto y = bilinear_upsample(x, 2);
  const auto gx = bilinear_upsample_backward(g, 2);
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) lhs += y.values()[i] * g.values()[i];
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x.values()[i] * gx.values()[i];
  EXPECT_NEAR(lhs, rhs, 1e-12);
  EXPECT_TRUE(footseg::gradcheck::check_bilinear_upsample(2, 7).passed());
}

TEST(Model, ZeroClassifierGivesHalfProbability) {
  MiniSegNet<float> net;
  net.initialize(3);
  std::mt19937_64 rng(7);
  Tensor<float> x(2, 3, 16, 16);
  fill_random(x.values(), rng);
  const auto logits = net.forward(x);
  ASSERT_EQ(logits.c(), 2);
  for (int n = 0; n < 2; ++n)
    for (std::size_t i = 0; i < logits.plane_size(); ++i)
      EXPECT_EQ(logits.plane(n, 0)[i], logits.plane(n, 1)[i]);
}

TEST(Model, RejectsBadInputShapes) {
  MiniSegNet<float> net;
  EXPECT_THROW(net.forward(Tensor<float>(1, 3, 18, 16)), std::invalid_argument);
  EXPECT_THROW(net.forward(Tensor<float>(1, 1, 16, 16)), std::invalid_argument);
}

TEST(Model, PlainAndDilatedHaveEqualParameterCounts) {
  MiniSegNet<float> dilated(NetConfig{3, true});
  MiniSegNet<float> plain(NetConfig{3, false});
  EXPECT_EQ(dilated.parameter_count(), plain.parameter_count());
  EXPECT_EQ(dilated.parameter_count(), 68266u);
}

TEST(Model, DilationWidensReceptiveField) {
  const auto field = [](bool dilated, LayerIndex last) {
    const auto specs = minisegnet_specs(NetConfig{3, dilated});
    std::vector<ConvSpec> stack;
    for (int i : {kStem, kDown, kDilA, kDilB}) stack.push_back(specs[static_cast<std::size_t>(i)].second);
    stack.push_back(specs[static_cast<std::size_t>(last)].second);
    return receptive_field(stack);
  };
  const int wide = field(true, kPyramidRate4), narrow = field(false, kPyramidRate4);
  EXPECT_GE((wide - narrow) / 2, 9);
  const std::vector<ConvSpec> two{{1, 1, 3, 1, 1}, {1, 1, 3, 2, 1}, {1, 1, 3, 1, 4}};
  EXPECT_EQ(receptive_field(two), 1 + 2 + 2 + 8 * 2);
}

TEST(Model, InitializationIsSeeded) {
  MiniSegNet<float> a, b, c;
  a.initialize(1);
  b.initialize(1);
  c.initialize(2);
  EXPECT_EQ(a.layers()[kStem].weight, b.layers()[kStem].weight);
  EXPECT_NE(a.layers()[kStem].weight, c.layers()[kStem].weight);
  for (float v : a.layers()[kClassifier].weight) EXPECT_EQ(v, 0.0f);
}

TEST(Model, FloatForwardTracksDouble) {
  MiniSegNet<float> net;
  net.initialize(4);
  std::mt19937_64 rng(8);
  for (auto& layer : net.layers()) fill_random<float>(layer.bias, rng, 0.05);
  fill_random<float>(net.layers()[kClassifier].weight, rng, 0.2);
  Tensor<float> xf(1, 3, 16, 16);
  fill_random(xf.values(), rng);
  Tensor<double> xd(1, 3, 16, 16);
  for (std::size_t i = 0; i < xf.size(); ++i) xd.values()[i] = xf.values()[i];
  const auto yf = net.forward(xf);
  const auto yd = net.cast<double>().forward(xd);
  for (std::size_t i = 0; i < yf.size(); ++i) EXPECT_NEAR(yf.values()[i], yd.values()[i], 1e-4);
}

TEST(Model, EndToEndGradientsPassFiniteDifferenceChecks) {
  for (bool dilated : {true, false}) {
    const auto r = footseg::gradcheck::check_end_to_end(dilated, 5);
    EXPECT_TRUE(r.passed()) << r.name << " " << r.max_relative_error;
    EXPECT_EQ(r.probes, 10);
  }
}

TEST(Sgd, ZeroGradientZeroDecayLeavesParameters) {
  std::vector<double> p{1.0, -2.0}, g{0.0, 0.0};
  sgd_step<double>(p, g, 0.1, 0.0);
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));
}

TEST(Sgd, UnitRateOnOwnValueGivesZero) {
  std::vector<double> p{1.5, -2.0, 3.0};
  const std::vector<double> g = p;
  sgd_step<double>(p, g, 1.0, 0.0);
  for (double v : p) EXPECT_EQ(v, 0.0);
}

TEST(Sgd, SingleScalarUpdate) {
  std::vector<double> p{2.0};
  const std::vector<double> g{0.5};
  sgd_step<double>(p, g, 0.1, 0.01);
  EXPECT_DOUBLE_EQ(p[0], 2.0 - 0.1 * (0.5 + 0.01 * 2.0));
  std::vector<double> bad{1.0, 2.0};
  EXPECT_THROW(sgd_step<double>(p, bad, 0.1, 0.0), std::invalid_argument);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  std::mt19937_64 rng(9);
  for (bool dilated : {true, false}) {
    MiniSegNet<float> net(NetConfig{3, dilated, 0.4f, 0.3f});
    for (auto& layer : net.layers()) {
      fill_random<float>(layer.weight, rng);
      fill_random<float>(layer.bias, rng);
    }
    const auto bytes = encode_checkpoint(net);
    const auto back = decode_checkpoint(bytes);
    EXPECT_EQ(back.config(), net.config());
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
      EXPECT_EQ(back.layers()[i].weight, net.layers()[i].weight);
      EXPECT_EQ(back.layers()[i].bias, net.layers()[i].bias);
    }
    EXPECT_EQ(encode_checkpoint(back), bytes);

    const auto path = std::filesystem::temp_directory_path() / "footseg_unit_ckpt.mseg";
    save_checkpoint(path, net);
    EXPECT_EQ(encode_checkpoint(load_checkpoint(path)), bytes);
  }
}

TEST(Checkpoint, CorruptionIsRejected) {
  MiniSegNet<float> net;
  net.initialize(1);
  auto bytes = encode_checkpoint(net);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad_magic), std::runtime_error);
  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW(decode_checkpoint(bad_version), std::runtime_error);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(decode_checkpoint(truncated), std::runtime_error);
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(decode_checkpoint(longer), std::runtime_error);
}

// Every compiled-in SIMD variant must agree with the scalar reference on
// ragged shapes that exercise the vector tails.
template <typename T>
void check_gemm_variants(double tol) {
  std::mt19937_64 rng(10);
  for (int m : {1, 3, 8, 17})
    for (int n : {1, 7, 16, 33})
      for (int k : {1, 5, 9, 40}) {
        std::vector<T> a(static_cast<std::size_t>(m * k)), b(static_cast<std::size_t>(k * n)),
            bt(static_cast<std::size_t>(n * k)), c0(static_cast<std::size_t>(m * n));
        fill_random<T>(a, rng);
        fill_random<T>(b, rng);
        fill_random<T>(bt, rng);
        fill_random<T>(c0, rng);
        auto ref_nn = c0, ref_nt = c0;
        simd::scalar::gemm_nn(m, n, k, a.data(), k, b.data(), n, ref_nn.data(), n);
        simd::scalar::gemm_nt(m, n, k, a.data(), k, bt.data(), k, ref_nt.data(), n);
        const auto compare = [&](auto nn, auto nt) {
          auto got_nn = c0, got_nt = c0;
          nn(m, n, k, a.data(), k, b.data(), n, got_nn.data(), n);
          nt(m, n, k, a.data(), k, bt.data(), k, got_nt.data(), n);
          for (std::size_t i = 0; i < c0.size(); ++i) {
            ASSERT_NEAR(got_nn[i], ref_nn[i], tol * (1 + k));
            ASSERT_NEAR(got_nt[i], ref_nt[i], tol * (1 + k));
          }
        };
        using Fn = void (*)(int, int, int, const T*, int, const T*, int, T*, int);
#ifdef FOOTSEG_HAVE_AVX2_KERNELS
        if (simd::backend_available(simd::Backend::avx2))
          compare(static_cast<Fn>(simd::avx2::gemm_nn), static_cast<Fn>(simd::avx2::gemm_nt));
#endif
#ifdef FOOTSEG_HAVE_NEON_KERNELS
        if (simd::backend_available(simd::Backend::neon))
          compare(static_cast<Fn>(simd::neon::gemm_nn), static_cast<Fn>(simd::neon::gemm_nt));
#endif
        compare(static_cast<Fn>(simd::gemm_nn), static_cast<Fn>(simd::gemm_nt));
      }
}

TEST(Simd, FloatKernelsMatchScalar) { check_gemm_variants<float>(1e-5); }
TEST(Simd, DoubleKernelsMatchScalar) { check_gemm_variants<double>(1e-13); }

TEST(Simd, BackendSelection) {
  const auto original = simd::active_backend();
  EXPECT_TRUE(simd::backend_available(simd::Backend::scalar));
  simd::set_backend(simd::Backend::scalar);
  EXPECT_EQ(simd::active_backend(), simd::Backend::scalar);
  EXPECT_EQ(simd::backend_name(simd::Backend::scalar), "scalar");
  simd::set_backend(original);
}

TEST(Simd, ConvolutionAgreesAcrossBackends) {
  std::mt19937_64 rng(11);
  Tensor<float> x(2, 5, 12, 12);
  fill_random(x.values(), rng);
  ConvSpec spec{5, 7, 3, 1, 2};
  std::vector<float> wt(spec.weight_count()), b(7);
  fill_random<float>(wt, rng);
  fill_random<float>(b, rng);
  const auto original = simd::active_backend();
  simd::set_backend(simd::Backend::scalar);
  const auto ref = conv2d_forward<float>(x, spec, wt, b);
  simd::set_backend(original);
  const auto got = conv2d_forward<float>(x, spec, wt, b);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(got.values()[i], ref.values()[i], 1e-4);
}

TEST(Gradcheck, FullSuitePasses) {
  const auto results = footseg::gradcheck::run_all(1);
  EXPECT_EQ(results.size(), 16u);
  for (const auto& r : results) EXPECT_TRUE(r.passed()) << r.name << " " << r.max_relative_error;
}
