#include "footseg/net/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "footseg/simd/kernels.hpp"

namespace footseg::net {
namespace {

template <typename T>
void check_conv_input(const Tensor<T>& x, const ConvSpec& spec, std::size_t weights) {
  spec.validate();
  if (x.c() != spec.in_channels)
    throw std::invalid_argument("conv2d: input has " + std::to_string(x.c()) + " channels, spec expects " +
                                std::to_string(spec.in_channels));
  if (weights != spec.weight_count()) throw std::invalid_argument("conv2d: weight count mismatch");
}

bool is_pointwise(const ConvSpec& spec) { return spec.kernel == 1 && spec.stride == 1; }

// col is [in * k * k] x [oh * ow].
template <typename T>
void im2col(const T* x, int channels, int h, int w, const ConvSpec& spec, int oh, int ow, T* col) {
  const int k = spec.kernel;
  const int pad = spec.padding();
  const std::size_t cols = static_cast<std::size_t>(oh) * ow;
  for (int c = 0; c < channels; ++c) {
    const T* xp = x + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        T* row = col + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * cols;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * spec.stride - pad + ky * spec.dilation;
          T* dst = row + static_cast<std::size_t>(oy) * ow;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + ow, T{0});
            continue;
          }
          const T* src = xp + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * spec.stride - pad + kx * spec.dilation;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : T{0};
          }
        }
      }
  }
}

template <typename T>
void col2im_add(const T* col, int channels, int h, int w, const ConvSpec& spec, int oh, int ow, T* x) {
  const int k = spec.kernel;
  const int pad = spec.padding();
  const std::size_t cols = static_cast<std::size_t>(oh) * ow;
  for (int c = 0; c < channels; ++c) {
    T* xp = x + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const T* row = col + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * cols;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * spec.stride - pad + ky * spec.dilation;
          if (iy < 0 || iy >= h) continue;
          const T* src = row + static_cast<std::size_t>(oy) * ow;
          T* dst = xp + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * spec.stride - pad + kx * spec.dilation;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
  }
}

struct Taps {
  std::vector<int> lo, hi;
  std::vector<double> t;
};

Taps upsample_taps(int in, int factor) {
  const int out = in * factor;
  Taps taps;
  taps.lo.resize(out);
  taps.hi.resize(out);
  taps.t.resize(out);
  for (int i = 0; i < out; ++i) {
    double s = (i + 0.5) / factor - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(s));
    taps.lo[i] = lo;
    taps.hi[i] = std::min(lo + 1, in - 1);
    taps.t[i] = s - lo;
  }
  return taps;
}

}  // namespace

void ConvSpec::validate() const {
  if (in_channels <= 0 || out_channels <= 0) throw std::invalid_argument("conv channels must be positive");
  if (kernel != 1 && kernel != 3) throw std::invalid_argument("conv kernel must be 1 or 3");
  if (stride < 1) throw std::invalid_argument("conv stride must be >= 1");
  if (dilation < 1) throw std::invalid_argument("conv dilation must be >= 1");
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const ConvSpec& spec, std::span<const T> weight,
                         std::span<const T> bias) {
  check_conv_input(x, spec, weight.size());
  if (bias.size() != static_cast<std::size_t>(spec.out_channels))
    throw std::invalid_argument("conv2d: bias count mismatch");
  const int oh = spec.out_size(x.h());
  const int ow = spec.out_size(x.w());
  if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv2d: input too small");
  Tensor<T> out(x.n(), spec.out_channels, oh, ow);
  const int p = oh * ow;
  const int k = spec.in_channels * spec.kernel * spec.kernel;
  std::vector<T> col;
  if (!is_pointwise(spec)) col.resize(static_cast<std::size_t>(k) * p);
  for (int n = 0; n < x.n(); ++n) {
    for (int co = 0; co < spec.out_channels; ++co) std::fill_n(out.plane(n, co), p, bias[co]);
    const T* src = x.plane(n, 0);
    if (!is_pointwise(spec)) {
      im2col(src, x.c(), x.h(), x.w(), spec, oh, ow, col.data());
      src = col.data();
    }
    simd::gemm_nn(spec.out_channels, p, k, weight.data(), k, src, p, out.plane(n, 0), p);
  }
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const ConvSpec& spec,
                             std::span<const T> weight) {
  check_conv_input(x, spec, weight.size());
  const int oh = spec.out_size(x.h());
  const int ow = spec.out_size(x.w());
  if (grad_out.n() != x.n() || grad_out.c() != spec.out_channels || grad_out.h() != oh || grad_out.w() != ow)
    throw std::invalid_argument("conv2d_backward: grad_out shape " + grad_out.shape_string() +
                                " inconsistent with forward");
  const int p = oh * ow;
  const int k = spec.in_channels * spec.kernel * spec.kernel;
  const int cout = spec.out_channels;

  ConvGrads<T> g{Tensor<T>(x.n(), x.c(), x.h(), x.w()), std::vector<T>(spec.weight_count(), T{0}),
                 std::vector<T>(static_cast<std::size_t>(cout), T{0})};

  // W^T, [k] x [cout]
  std::vector<T> wt(static_cast<std::size_t>(k) * cout);
  for (int co = 0; co < cout; ++co)
    for (int i = 0; i < k; ++i) wt[static_cast<std::size_t>(i) * cout + co] = weight[static_cast<std::size_t>(co) * k + i];

  const bool pointwise = is_pointwise(spec);
  std::vector<T> col, gcol;
  if (!pointwise) {
    col.resize(static_cast<std::size_t>(k) * p);
    gcol.resize(static_cast<std::size_t>(k) * p);
  }
  for (int n = 0; n < x.n(); ++n) {
    const T* go = grad_out.plane(n, 0);
    for (int co = 0; co < cout; ++co) {
      const T* row = go + static_cast<std::size_t>(co) * p;
      T s{0};
      for (int i = 0; i < p; ++i) s += row[i];
      g.grad_b[co] += s;
    }
    if (pointwise) {
      simd::gemm_nt(cout, k, p, go, p, x.plane(n, 0), p, g.grad_w.data(), k);
      simd::gemm_nn(k, p, cout, wt.data(), cout, go, p, g.grad_x.plane(n, 0), p);
    } else {
      im2col(x.plane(n, 0), x.c(), x.h(), x.w(), spec, oh, ow, col.data());
      simd::gemm_nt(cout, k, p, go, p, col.data(), p, g.grad_w.data(), k);
      std::fill(gcol.begin(), gcol.end(), T{0});
      simd::gemm_nn(k, p, cout, wt.data(), cout, go, p, gcol.data(), p);
      col2im_add(gcol.data(), x.c(), x.h(), x.w(), spec, oh, ow, g.grad_x.plane(n, 0));
    }
  }
  return g;
}

template <typename T>
Tensor<T> bilinear_upsample(const Tensor<T>& x, int factor) {
  if (factor < 1) throw std::invalid_argument("upsample factor must be >= 1");
  if (factor == 1) return x;
  const Taps ty = upsample_taps(x.h(), factor);
  const Taps tx = upsample_taps(x.w(), factor);
  Tensor<T> out(x.n(), x.c(), x.h() * factor, x.w() * factor);
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c) {
      const T* src = x.plane(n, c);
      T* dst = out.plane(n, c);
      for (int oy = 0; oy < out.h(); ++oy) {
        const T* r0 = src + static_cast<std::size_t>(ty.lo[oy]) * x.w();
        const T* r1 = src + static_cast<std::size_t>(ty.hi[oy]) * x.w();
        const T wy = static_cast<T>(ty.t[oy]);
        for (int ox = 0; ox < out.w(); ++ox) {
          const T wx = static_cast<T>(tx.t[ox]);
          const T top = r0[tx.lo[ox]] + (r0[tx.hi[ox]] - r0[tx.lo[ox]]) * wx;
          const T bottom = r1[tx.lo[ox]] + (r1[tx.hi[ox]] - r1[tx.lo[ox]]) * wx;
          dst[static_cast<std::size_t>(oy) * out.w() + ox] = top + (bottom - top) * wy;
        }
      }
    }
  return out;
}

template <typename T>
Tensor<T> bilinear_upsample_backward(const Tensor<T>& grad_out, int factor) {
  if (factor < 1) throw std::invalid_argument("upsample factor must be >= 1");
  if (factor == 1) return grad_out;
  if (grad_out.h() % factor != 0 || grad_out.w() % factor != 0)
    throw std::invalid_argument("upsample backward: gradient size not a multiple of factor");
  const int ih = grad_out.h() / factor;
  const int iw = grad_out.w() / factor;
  const Taps ty = upsample_taps(ih, factor);
  const Taps tx = upsample_taps(iw, factor);
  Tensor<T> g(grad_out.n(), grad_out.c(), ih, iw);
  for (int n = 0; n < g.n(); ++n)
    for (int c = 0; c < g.c(); ++c) {
      const T* src = grad_out.plane(n, c);
      T* dst = g.plane(n, c);
      for (int oy = 0; oy < grad_out.h(); ++oy) {
        T* r0 = dst + static_cast<std::size_t>(ty.lo[oy]) * iw;
        T* r1 = dst + static_cast<std::size_t>(ty.hi[oy]) * iw;
        const T wy = static_cast<T>(ty.t[oy]);
        for (int ox = 0; ox < grad_out.w(); ++ox) {
          const T v = src[static_cast<std::size_t>(oy) * grad_out.w() + ox];
          const T wx = static_cast<T>(tx.t[ox]);
          const T top = v * (T{1} - wy);
          const T bottom = v * wy;
          r0[tx.lo[ox]] += top * (T{1} - wx);
          r0[tx.hi[ox]] += top * wx;
          r1[tx.lo[ox]] += bottom * (T{1} - wx);
          r1[tx.hi[ox]] += bottom * wx;
        }
      }
    }
  return g;
}

template <typename T>
void relu_inplace(Tensor<T>& x) {
  for (T& v : x.values()) v = v > T{0} ? v : T{0};
}

template <typename T>
void relu_backward_inplace(Tensor<T>& grad, const Tensor<T>& output) {
  if (!grad.same_shape(output)) throw std::invalid_argument("relu_backward: shape mismatch");
  auto g = grad.values();
  auto o = output.values();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(o[i] > T{0})) g[i] = T{0};
}

template <typename T>
Tensor<T> concat_channels(const std::vector<const Tensor<T>*>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  const Tensor<T>& first = *parts.front();
  int channels = 0;
  for (const auto* p : parts) {
    if (p->n() != first.n() || p->h() != first.h() || p->w() != first.w())
      throw std::invalid_argument("concat: spatial or batch mismatch");
    channels += p->c();
  }
  Tensor<T> out(first.n(), channels, first.h(), first.w());
  for (int n = 0; n < first.n(); ++n) {
    int offset = 0;
    for (const auto* p : parts) {
      std::copy_n(p->plane(n, 0), static_cast<std::size_t>(p->c()) * p->plane_size(), out.plane(n, offset));
      offset += p->c();
    }
  }
  return out;
}

template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& grad, const std::vector<int>& channels) {
  int total = 0;
  for (int c : channels) total += c;
  if (total != grad.c()) throw std::invalid_argument("split: channel counts do not add up");
  std::vector<Tensor<T>> out;
  int offset = 0;
  for (int c : channels) {
    Tensor<T> part(grad.n(), c, grad.h(), grad.w());
    for (int n = 0; n < grad.n(); ++n)
      std::copy_n(grad.plane(n, offset), static_cast<std::size_t>(c) * grad.plane_size(), part.plane(n, 0));
    out.push_back(std::move(part));
    offset += c;
  }
  return out;
}

#define FOOTSEG_INSTANTIATE_LAYERS(T)                                                                   \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const ConvSpec&, std::span<const T>,             \
                                    std::span<const T>);                                               \
  template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const ConvSpec&,           \
                                        std::span<const T>);                                           \
  template Tensor<T> bilinear_upsample(const Tensor<T>&, int);                                         \
  template Tensor<T> bilinear_upsample_backward(const Tensor<T>&, int);                                \
  template void relu_inplace(Tensor<T>&);                                                              \
  template void relu_backward_inplace(Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> concat_channels(const std::vector<const Tensor<T>*>&);                            \
  template std::vector<Tensor<T>> split_channels(const Tensor<T>&, const std::vector<int>&);

FOOTSEG_INSTANTIATE_LAYERS(float)
FOOTSEG_INSTANTIATE_LAYERS(double)

#undef FOOTSEG_INSTANTIATE_LAYERS

}  // namespace footseg::net
