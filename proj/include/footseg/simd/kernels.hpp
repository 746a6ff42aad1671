#pragma once

// Dense linear-algebra kernels used by the convolution layers.
//
// Every kernel has a portable scalar reference implementation and, where the
// target supports it, an AVX2+FMA (x86-64) or NEON (AArch64) variant. The
// variant is chosen once at runtime from CPU feature detection and can be
// overridden with set_backend() or the FOOTSEG_SIMD environment variable
// ("scalar", "avx2", "neon").
//
// All matrices are row-major with explicit leading dimensions. Kernels
// accumulate into C (C += ...), they never overwrite it.

#include <string_view>

namespace footseg::simd {

enum class Backend { scalar, avx2, neon };

std::string_view backend_name(Backend backend);
bool backend_available(Backend backend);

// Backend used by the dispatching entry points below.
Backend active_backend();

// Throws std::invalid_argument if the backend is not available on this CPU.
void set_backend(Backend backend);

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c,
             int ldc);
void gemm_nn(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc);

// C[m x n] += A[m x k] * B[n x k]^T
void gemm_nt(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c,
             int ldc);
void gemm_nt(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc);

// Per-backend entry points, exposed so tests can check every variant against
// the scalar reference regardless of which one is active.
namespace scalar {
void gemm_nn(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c,
             int ldc);
void gemm_nn(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc);
void gemm_nt(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c,
             int ldc);
void gemm_nt(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define FOOTSEG_HAVE_AVX2_KERNELS 1
namespace avx2 {
void gemm_nn(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c,
             int ldc);
void gemm_nn(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc);
void gemm_nt(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c,
             int ldc);
void gemm_nt(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc);
}  // namespace avx2
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define FOOTSEG_HAVE_NEON_KERNELS 1
namespace neon {
void gemm_nn(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c,
             int ldc);
void gemm_nn(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc);
void gemm_nt(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c,
             int ldc);
void gemm_nt(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc);
}  // namespace neon
#endif

}  // namespace footseg::simd
