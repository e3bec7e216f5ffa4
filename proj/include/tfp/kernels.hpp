#pragma once

#include <cstddef>

namespace tfp::kernels {

enum class Backend { scalar, avx2, neon };

bool supported(Backend b);
const char* name(Backend b);
// Backend chosen once from the CPU; set_backend overrides it (throws if unsupported).
Backend active();
void set_backend(Backend b);
void reset_backend();

double dot(const double* a, const double* b, std::size_t n);
// C[i*N + j] = sum_k A[i*K + k] * B[j*K + k]   (C = A * B^T, row-major)
void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B, double* C);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B, double* C);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B, double* C);
}  // namespace avx2

namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B, double* C);
}  // namespace neon

}  // namespace tfp::kernels
