#pragma once

#include <cstddef>

// Dense double-precision inner loops used by the pair-evaluation paths
// (distortion scans, Lipschitz certificates, frame interpolation). A scalar
// reference implementation always exists; an AVX2+FMA variant is selected at
// runtime when the CPU supports it. Set CARNOT_KERNELS=scalar|avx2 to force a
// backend (forcing avx2 on unsupported hardware falls back to scalar).

namespace carnot::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name();

double dot(const double* a, const double* b, std::size_t n);
double squared_norm(const double* a, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);

// Reference kernels, used directly by the equivalence tests.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_norm(const double* a, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace scalar

#ifdef CARNOT_KERNELS_AVX2
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_norm(const double* a, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace carnot::kernels
