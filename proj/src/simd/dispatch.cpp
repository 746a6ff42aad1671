#include "footseg/simd/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace footseg::simd {
namespace {

struct KernelTable {
  void (*nn_f32)(int, int, int, const float*, int, const float*, int, float*, int);
  void (*nn_f64)(int, int, int, const double*, int, const double*, int, double*, int);
  void (*nt_f32)(int, int, int, const float*, int, const float*, int, float*, int);
  void (*nt_f64)(int, int, int, const double*, int, const double*, int, double*, int);
};

KernelTable table_for(Backend backend) {
  switch (backend) {
#if defined(FOOTSEG_HAVE_AVX2_KERNELS)
    case Backend::avx2:
      return {avx2::gemm_nn, avx2::gemm_nn, avx2::gemm_nt, avx2::gemm_nt};
#endif
#if defined(FOOTSEG_HAVE_NEON_KERNELS)
    case Backend::neon:
      return {neon::gemm_nn, neon::gemm_nn, neon::gemm_nt, neon::gemm_nt};
#endif
    default:
      return {scalar::gemm_nn, scalar::gemm_nn, scalar::gemm_nt, scalar::gemm_nt};
  }
}

Backend detect() {
  if (const char* forced = std::getenv("FOOTSEG_SIMD")) {
    const std::string name(forced);
    for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon})
      if (name == backend_name(b) && backend_available(b)) return b;
  }
  if (backend_available(Backend::avx2)) return Backend::avx2;
  if (backend_available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

struct State {
  Backend backend;
  KernelTable table;
  State() : backend(detect()), table(table_for(backend)) {}
};

State& state() {
  static State s;
  return s;
}

}  // namespace

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

bool backend_available(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(FOOTSEG_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(FOOTSEG_HAVE_NEON_KERNELS)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() { return state().backend; }

void set_backend(Backend backend) {
  if (!backend_available(backend))
    throw std::invalid_argument("SIMD backend not available: " + std::string(backend_name(backend)));
  state().backend = backend;
  state().table = table_for(backend);
}

void gemm_nn(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c,
             int ldc) {
  state().table.nn_f32(m, n, k, a, lda, b, ldb, c, ldc);
}
void gemm_nn(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc) {
  state().table.nn_f64(m, n, k, a, lda, b, ldb, c, ldc);
}
void gemm_nt(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c,
             int ldc) {
  state().table.nt_f32(m, n, k, a, lda, b, ldb, c, ldc);
}
void gemm_nt(int m, int n, int k, const double* a, int lda, const double* b, int ldb, double* c,
             int ldc) {
  state().table.nt_f64(m, n, k, a, lda, b, ldb, c, ldc);
}

}  // namespace footseg::simd
