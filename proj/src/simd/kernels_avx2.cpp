// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after runtime feature detection. Keep it free of
// standard-library templates so no AVX2-encoded inline definitions leak into
// the rest of the program through ODR merging.

#include "footseg/simd/kernels.hpp"

#include <immintrin.h>

namespace footseg::simd::avx2 {
namespace {

inline __m256i tail_mask_ps(int remaining) {
  const __m256i lanes = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
  return _mm256_cmpgt_epi32(_mm256_set1_epi32(remaining), lanes);
}

inline __m256i tail_mask_pd(int remaining) {
  const __m256i lanes = _mm256_setr_epi64x(0, 1, 2, 3);
  return _mm256_cmpgt_epi64(_mm256_set1_epi64x(remaining), lanes);
}

inline float hsum(__m256 v) {
  __m128 lo = _mm_add_ps(_mm256_castps256_ps128(v), _mm256_extractf128_ps(v, 1));
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm_add_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  __m128d hi = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, hi));
}

// R rows of C against the full width of B; 16-column register tiles.
template <int R>
void nn_rows(int n, int k, const float* a, int lda, const float* b, int ldb, float* c, int ldc) {
  int j = 0;
  for (; j + 16 <= n; j += 16) {
    __m256 acc[R][2];
    for (int r = 0; r < R; ++r) {
      acc[r][0] = _mm256_loadu_ps(c + static_cast<long>(r) * ldc + j);
      acc[r][1] = _mm256_loadu_ps(c + static_cast<long>(r) * ldc + j + 8);
    }
    for (int p = 0; p < k; ++p) {
      const float* bp = b + static_cast<long>(p) * ldb + j;
      const __m256 b0 = _mm256_loadu_ps(bp);
      const __m256 b1 = _mm256_loadu_ps(bp + 8);
      for (int r = 0; r < R; ++r) {
        const __m256 av = _mm256_broadcast_ss(a + static_cast<long>(r) * lda + p);
        acc[r][0] = _mm256_fmadd_ps(av, b0, acc[r][0]);
        acc[r][1] = _mm256_fmadd_ps(av, b1, acc[r][1]);
      }
    }
    for (int r = 0; r < R; ++r) {
      _mm256_storeu_ps(c + static_cast<long>(r) * ldc + j, acc[r][0]);
      _mm256_storeu_ps(c + static_cast<long>(r) * ldc + j + 8, acc[r][1]);
    }
  }
  for (; j < n; j += 8) {
    const int remaining = n - j;
    const __m256i mask = tail_mask_ps(remaining);
    __m256 acc[R];
    for (int r = 0; r < R; ++r) acc[r] = _mm256_maskload_ps(c + static_cast<long>(r) * ldc + j, mask);
    for (int p = 0; p < k; ++p) {
      const __m256 bv = _mm256_maskload_ps(b + static_cast<long>(p) * ldb + j, mask);
      for (int r = 0; r < R; ++r) {
        const __m256 av = _mm256_broadcast_ss(a + static_cast<long>(r) * lda + p);
        acc[r] = _mm256_fmadd_ps(av, bv, acc[r]);
      }
    }
    for (int r = 0; r < R; ++r) _mm256_maskstore_ps(c + static_cast<long>(r) * ldc + j, mask, acc[r]);
  }
}

template <int R>
void nn_rows(int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc) {
  int j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d acc[R][2];
    for (int r = 0; r < R; ++r) {
      acc[r][0] = _mm256_loadu_pd(c + static_cast<long>(r) * ldc + j);
      acc[r][1] = _mm256_loadu_pd(c + static_cast<long>(r) * ldc + j + 4);
    }
    for (int p = 0; p < k; ++p) {
      const double* bp = b + static_cast<long>(p) * ldb + j;
      const __m256d b0 = _mm256_loadu_pd(bp);
      const __m256d b1 = _mm256_loadu_pd(bp + 4);
      for (int r = 0; r < R; ++r) {
        const __m256d av = _mm256_broadcast_sd(a + static_cast<long>(r) * lda + p);
        acc[r][0] = _mm256_fmadd_pd(av, b0, acc[r][0]);
        acc[r][1] = _mm256_fmadd_pd(av, b1, acc[r][1]);
      }
    }
    for (int r = 0; r < R; ++r) {
      _mm256_storeu_pd(c + static_cast<long>(r) * ldc + j, acc[r][0]);
      _mm256_storeu_pd(c + static_cast<long>(r) * ldc + j + 4, acc[r][1]);
    }
  }
  for (; j < n; j += 4) {
    const __m256i mask = tail_mask_pd(n - j);
    __m256d acc[R];
    for (int r = 0; r < R; ++r) acc[r] = _mm256_maskload_pd(c + static_cast<long>(r) * ldc + j, mask);
    for (int p = 0; p < k; ++p) {
      const __m256d bv = _mm256_maskload_pd(b + static_cast<long>(p) * ldb + j, mask);
      for (int r = 0; r < R; ++r) {
        const __m256d av = _mm256_broadcast_sd(a + static_cast<long>(r) * lda + p);
        acc[r] = _mm256_fmadd_pd(av, bv, acc[r]);
      }
    }
    for (int r = 0; r < R; ++r) _mm256_maskstore_pd(c + static_cast<long>(r) * ldc + j, mask, acc[r]);
  }
}

template <typename T>
void gemm_nn_impl(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc) {
  int i = 0;
  for (; i + 4 <= m; i += 4)
    nn_rows<4>(n, k, a + static_cast<long>(i) * lda, lda, b, ldb, c + static_cast<long>(i) * ldc, ldc);
  switch (m - i) {
    case 3: nn_rows<3>(n, k, a + static_cast<long>(i) * lda, lda, b, ldb, c + static_cast<long>(i) * ldc, ldc); break;
    case 2: nn_rows<2>(n, k, a + static_cast<long>(i) * lda, lda, b, ldb, c + static_cast<long>(i) * ldc, ldc); break;
    case 1: nn_rows<1>(n, k, a + static_cast<long>(i) * lda, lda, b, ldb, c + static_cast<long>(i) * ldc, ldc); break;
    default: break;
  }
}

// Four dot products sharing one pass over a row of A.
void nt_row(int n, int k, const float* arow, const float* b, int ldb, float* crow) {
  int j = 0;
  for (; j + 4 <= n; j += 4) {
    const float* b0 = b + static_cast<long>(j) * ldb;
    const float* b1 = b0 + ldb;
    const float* b2 = b1 + ldb;
    const float* b3 = b2 + ldb;
    __m256 s0 = _mm256_setzero_ps(), s1 = _mm256_setzero_ps();
    __m256 s2 = _mm256_setzero_ps(), s3 = _mm256_setzero_ps();
    int p = 0;
    for (; p + 8 <= k; p += 8) {
      const __m256 av = _mm256_loadu_ps(arow + p);
      s0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b0 + p), s0);
      s1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b1 + p), s1);
      s2 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b2 + p), s2);
      s3 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b3 + p), s3);
    }
    if (p < k) {
      const __m256i mask = tail_mask_ps(k - p);
      const __m256 av = _mm256_maskload_ps(arow + p, mask);
      s0 = _mm256_fmadd_ps(av, _mm256_maskload_ps(b0 + p, mask), s0);
      s1 = _mm256_fmadd_ps(av, _mm256_maskload_ps(b1 + p, mask), s1);
      s2 = _mm256_fmadd_ps(av, _mm256_maskload_ps(b2 + p, mask), s2);
      s3 = _mm256_fmadd_ps(av, _mm256_maskload_ps(b3 + p, mask), s3);
    }
    crow[j] += hsum(s0);
    crow[j + 1] += hsum(s1);
    crow[j + 2] += hsum(s2);
    crow[j + 3] += hsum(s3);
  }
  for (; j < n; ++j) {
    const float* bj = b + static_cast<long>(j) * ldb;
    __m256 s = _mm256_setzero_ps();
    int p = 0;
    for (; p + 8 <= k; p += 8) s = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p), _mm256_loadu_ps(bj + p), s);
    if (p < k) {
      const __m256i mask = tail_mask_ps(k - p);
      s = _mm256_fmadd_ps(_mm256_maskload_ps(arow + p, mask), _mm256_maskload_ps(bj + p, mask), s);
    }
    crow[j] += hsum(s);
  }
}

void nt_row(int n, int k, const double* arow, const double* b, int ldb, double* crow) {
  int j = 0;
  for (; j + 4 <= n; j += 4) {
    const double* b0 = b + static_cast<long>(j) * ldb;
    const double* b1 = b0 + ldb;
    const double* b2 = b1 + ldb;
    const double* b3 = b2 + ldb;
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
    int p = 0;
    for (; p + 4 <= k; p += 4) {
      const __m256d av = _mm256_loadu_pd(arow + p);
      s0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), s0);
      s1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), s1);
      s2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + p), s2);
      s3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + p), s3);
    }
    if (p < k) {
      const __m256i mask = tail_mask_pd(k - p);
      const __m256d av = _mm256_maskload_pd(arow + p, mask);
      s0 = _mm256_fmadd_pd(av, _mm256_maskload_pd(b0 + p, mask), s0);
      s1 = _mm256_fmadd_pd(av, _mm256_maskload_pd(b1 + p, mask), s1);
      s2 = _mm256_fmadd_pd(av, _mm256_maskload_pd(b2 + p, mask), s2);
      s3 = _mm256_fmadd_pd(av, _mm256_maskload_pd(b3 + p, mask), s3);
    }
    crow[j] += hsum(s0);
    crow[j + 1] += hsum(s1);
    crow[j + 2] += hsum(s2);
    crow[j + 3] += hsum(s3);
  }
  for (; j < n; ++j) {
    const double* bj = b + static_cast<long>(j) * ldb;
    __m256d s = _mm256_setzero_pd();
    int p = 0;
    for (; p + 4 <= k; p += 4) s = _mm256_fmadd_pd(_mm256_loadu_pd(arow + p), _mm256_loadu_pd(bj + p), s);
    if (p < k) {
      const __m256i mask = tail_mask_pd(k - p);
      s = _mm256_fmadd_pd(_mm256_maskload_pd(arow + p, mask), _mm256_maskload_pd(bj + p, mask), s);
    }
    crow[j] += hsum(s);
  }
}

template <typename T>
void gemm_nt_impl(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc) {
  for (int i = 0; i < m; ++i)
    nt_row(n, k, a + static_cast<long>(i) * lda, b, ldb, c + static_cast<long>(i) * ldc);
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

}  // namespace footseg::simd::avx2
