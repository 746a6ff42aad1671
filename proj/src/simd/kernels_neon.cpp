// NEON kernels for AArch64, where Advanced SIMD is part of the base ISA.

#include "footseg/simd/kernels.hpp"

#if defined(FOOTSEG_HAVE_NEON_KERNELS)

#include <arm_neon.h>

namespace footseg::simd::neon {
namespace {

template <int R>
void nn_rows(int n, int k, const float* a, int lda, const float* b, int ldb, float* c, int ldc) {
  int j = 0;
  for (; j + 8 <= n; j += 8) {
    float32x4_t acc[R][2];
    for (int r = 0; r < R; ++r) {
      acc[r][0] = vld1q_f32(c + static_cast<long>(r) * ldc + j);
      acc[r][1] = vld1q_f32(c + static_cast<long>(r) * ldc + j + 4);
    }
    for (int p = 0; p < k; ++p) {
      const float* bp = b + static_cast<long>(p) * ldb + j;
      const float32x4_t b0 = vld1q_f32(bp);
      const float32x4_t b1 = vld1q_f32(bp + 4);
      for (int r = 0; r < R; ++r) {
        const float av = a[static_cast<long>(r) * lda + p];
        acc[r][0] = vfmaq_n_f32(acc[r][0], b0, av);
        acc[r][1] = vfmaq_n_f32(acc[r][1], b1, av);
      }
    }
    for (int r = 0; r < R; ++r) {
      vst1q_f32(c + static_cast<long>(r) * ldc + j, acc[r][0]);
      vst1q_f32(c + static_cast<long>(r) * ldc + j + 4, acc[r][1]);
    }
  }
  for (; j < n; ++j) {
    for (int r = 0; r < R; ++r) {
      float acc = c[static_cast<long>(r) * ldc + j];
      for (int p = 0; p < k; ++p) acc += a[static_cast<long>(r) * lda + p] * b[static_cast<long>(p) * ldb + j];
      c[static_cast<long>(r) * ldc + j] = acc;
    }
  }
}

template <int R>
void nn_rows(int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc) {
  int j = 0;
  for (; j + 4 <= n; j += 4) {
    float64x2_t acc[R][2];
    for (int r = 0; r < R; ++r) {
      acc[r][0] = vld1q_f64(c + static_cast<long>(r) * ldc + j);
      acc[r][1] = vld1q_f64(c + static_cast<long>(r) * ldc + j + 2);
    }
    for (int p = 0; p < k; ++p) {
      const double* bp = b + static_cast<long>(p) * ldb + j;
      const float64x2_t b0 = vld1q_f64(bp);
      const float64x2_t b1 = vld1q_f64(bp + 2);
      for (int r = 0; r < R; ++r) {
        const float64x2_t av = vdupq_n_f64(a[static_cast<long>(r) * lda + p]);
        acc[r][0] = vfmaq_f64(acc[r][0], av, b0);
        acc[r][1] = vfmaq_f64(acc[r][1], av, b1);
      }
    }
    for (int r = 0; r < R; ++r) {
      vst1q_f64(c + static_cast<long>(r) * ldc + j, acc[r][0]);
      vst1q_f64(c + static_cast<long>(r) * ldc + j + 2, acc[r][1]);
    }
  }
  for (; j < n; ++j) {
    for (int r = 0; r < R; ++r) {
      double acc = c[static_cast<long>(r) * ldc + j];
      for (int p = 0; p < k; ++p) acc += a[static_cast<long>(r) * lda + p] * b[static_cast<long>(p) * ldb + j];
      c[static_cast<long>(r) * ldc + j] = acc;
    }
  }
}

template <typename T>
void gemm_nn_impl(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc) {
  int i = 0;
  for (; i + 4 <= m; i += 4)
    nn_rows<4>(n, k, a + static_cast<long>(i) * lda, lda, b, ldb, c + static_cast<long>(i) * ldc, ldc);
  for (; i < m; ++i)
    nn_rows<1>(n, k, a + static_cast<long>(i) * lda, lda, b, ldb, c + static_cast<long>(i) * ldc, ldc);
}

float dot(int k, const float* x, const float* y) {
  float32x4_t s = vdupq_n_f32(0.0f);
  int p = 0;
  for (; p + 4 <= k; p += 4) s = vfmaq_f32(s, vld1q_f32(x + p), vld1q_f32(y + p));
  float acc = vaddvq_f32(s);
  for (; p < k; ++p) acc += x[p] * y[p];
  return acc;
}

double dot(int k, const double* x, const double* y) {
  float64x2_t s = vdupq_n_f64(0.0);
  int p = 0;
  for (; p + 2 <= k; p += 2) s = vfmaq_f64(s, vld1q_f64(x + p), vld1q_f64(y + p));
  double acc = vaddvq_f64(s);
  for (; p < k; ++p) acc += x[p] * y[p];
  return acc;
}

template <typename T>
void gemm_nt_impl(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      c[static_cast<long>(i) * ldc + j] += dot(k, a + static_cast<long>(i) * lda, b + static_cast<long>(j) * ldb);
}

}  // namespace

void gemm_nn(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c,
             int ldc) {
  gemm_nn_impl(m, n, k, a, lda, b, ldb, c, ldc);
}
void gemm_nn(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc) {
  gemm_nn_impl(m, n, k, a, lda, b, ldb, c, ldc);
}
void gemm_nt(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c,
             int ldc) {
  gemm_nt_impl(m, n, k, a, lda, b, ldb, c, ldc);
}
void gemm_nt(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc) {
  gemm_nt_impl(m, n, k, a, lda, b, ldb, c, ldc);
}

}  // namespace footseg::simd::neon

#endif
