#include <immintrin.h>

#include "tfp/kernels.hpp"

namespace tfp::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

// 1x4 register block over B rows; short K falls through to the scalar tail
void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B, double* C) {
  if (K < 4) {
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < K; ++k) s += A[i * K + k] * B[j * K + k];
        C[i * N + j] = s;
      }
    return;
  }
  for (std::size_t i = 0; i < M; ++i) {
    const double* a = A + i * K;
    std::size_t j = 0;
    for (; j + 4 <= N; j += 4) {
      const double* b0 = B + j * K;
      const double* b1 = b0 + K;
      const double* b2 = b1 + K;
      const double* b3 = b2 + K;
      __m256d c0 = _mm256_setzero_pd(), c1 = _mm256_setzero_pd(), c2 = _mm256_setzero_pd(),
              c3 = _mm256_setzero_pd();
      std::size_t k = 0;
      for (; k + 4 <= K; k += 4) {
        __m256d av = _mm256_loadu_pd(a + k);
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + k), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + k), c1);
        c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + k), c2);
        c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + k), c3);
      }
      double s0 = hsum(c0), s1 = hsum(c1), s2 = hsum(c2), s3 = hsum(c3);
      for (; k < K; ++k) {
        s0 += a[k] * b0[k];
        s1 += a[k] * b1[k];
        s2 += a[k] * b2[k];
        s3 += a[k] * b3[k];
      }
      C[i * N + j] = s0;
      C[i * N + j + 1] = s1;
      C[i * N + j + 2] = s2;
      C[i * N + j + 3] = s3;
    }
    for (; j < N; ++j) C[i * N + j] = dot(a, B + j * K, K);
  }
}

}  // namespace tfp::kernels::avx2
