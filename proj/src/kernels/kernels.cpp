#include "tfp/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace tfp::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B, double* C) {
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < N; ++j) C[i * N + j] = dot(A + i * K, B + j * K, K);
}

}  // namespace scalar

#if !defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B, double* C) {
  scalar::gemm_nt(M, N, K, A, B, C);
}
}  // namespace neon
#endif

#if !(defined(__x86_64__) || defined(__i386__))
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B, double* C) {
  scalar::gemm_nt(M, N, K, A, B, C);
}
}  // namespace avx2
#endif

bool supported(Backend b) {
  switch (b) {
    case Backend::scalar: return true;
    case Backend::avx2:
#if defined(__x86_64__) || defined(__i386__)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const char* name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "?";
}

namespace {

Backend detect() {
  if (supported(Backend::avx2)) return Backend::avx2;
  if (supported(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{detect()};
  return b;
}

}  // namespace

Backend active() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!supported(b)) throw std::runtime_error(std::string("kernel backend not supported on this CPU: ") + name(b));
  current().store(b);
}

void reset_backend() { current().store(detect()); }

double dot(const double* a, const double* b, std::size_t n) {
  switch (active()) {
    case Backend::avx2: return avx2::dot(a, b, n);
    case Backend::neon: return neon::dot(a, b, n);
    default: return scalar::dot(a, b, n);
  }
}

void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B, double* C) {
  switch (active()) {
    case Backend::avx2: avx2::gemm_nt(M, N, K, A, B, C); break;
    case Backend::neon: neon::gemm_nt(M, N, K, A, B, C); break;
    default: scalar::gemm_nt(M, N, K, A, B, C);
  }
}

}  // namespace tfp::kernels
