#include "footseg/simd/kernels.hpp"

namespace footseg::simd::scalar {
namespace {

template <typename T>
void gemm_nn_impl(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<long>(i) * ldc;
    const T* arow = a + static_cast<long>(i) * lda;
    for (int p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + static_cast<long>(p) * ldb;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void gemm_nt_impl(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<long>(i) * lda;
    for (int j = 0; j < n; ++j) {
      const T* brow = b + static_cast<long>(j) * ldb;
      T acc = 0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c[static_cast<long>(i) * ldc + j] += acc;
    }
  }
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

}  // namespace footseg::simd::scalar
