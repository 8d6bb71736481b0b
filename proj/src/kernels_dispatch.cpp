#include "carnot/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace carnot::kernels {

namespace {

struct Vtable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_norm)(const double*, std::size_t);
  double (*squared_distance)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
};

constexpr Vtable kScalar = {scalar::dot,  scalar::squared_norm, scalar::squared_distance,
                            scalar::sum,  scalar::axpy,         scalar::scale};

#ifdef CARNOT_KERNELS_AVX2
constexpr Vtable kAvx2 = {avx2::dot,  avx2::squared_norm, avx2::squared_distance,
                          avx2::sum,  avx2::axpy,         avx2::scale};

bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}
#endif

Backend pick_backend() {
  const char* force = std::getenv("CARNOT_KERNELS");
  if (force && std::strcmp(force, "scalar") == 0) return Backend::scalar;
#ifdef CARNOT_KERNELS_AVX2
  if (force && std::strcmp(force, "avx2") == 0)
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
  if (cpu_has_avx2()) return Backend::avx2;
#endif
  return Backend::scalar;
}

const Backend g_backend = pick_backend();

const Vtable& table() {
#ifdef CARNOT_KERNELS_AVX2
  if (g_backend == Backend::avx2) return kAvx2;
#endif
  return kScalar;
}

}  // namespace

Backend active_backend() { return g_backend; }

const char* backend_name() { return g_backend == Backend::avx2 ? "avx2" : "scalar"; }

double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }
double squared_norm(const double* a, std::size_t n) { return table().squared_norm(a, n); }
double squared_distance(const double* a, const double* b, std::size_t n) {
  return table().squared_distance(a, b, n);
}
double sum(const double* a, std::size_t n) { return table().sum(a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { table().axpy(alpha, x, y, n); }
void scale(double alpha, double* x, std::size_t n) { table().scale(alpha, x, n); }

}  // namespace carnot::kernels
