#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "carnot/kernels.hpp"
#include "carnot/rng.hpp"

using namespace carnot;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

}  // namespace

TEST_CASE("dispatched kernels match the scalar reference") {
  MESSAGE("active backend: ", kernels::backend_name());
  Rng rng(123);
  for (std::size_t n : {0, 1, 3, 4, 7, 8, 17, 64, 1000, 2487}) {
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);
    const double scale = static_cast<double>(n) + 1.0;

    CHECK(kernels::dot(a.data(), b.data(), n) ==
          doctest::Approx(kernels::scalar::dot(a.data(), b.data(), n)).epsilon(1e-13 * scale));
    CHECK(kernels::squared_norm(a.data(), n) ==
          doctest::Approx(kernels::scalar::squared_norm(a.data(), n)).epsilon(1e-13 * scale));
    CHECK(kernels::squared_distance(a.data(), b.data(), n) ==
          doctest::Approx(kernels::scalar::squared_distance(a.data(), b.data(), n))
              .epsilon(1e-13 * scale));
    CHECK(kernels::sum(a.data(), n) ==
          doctest::Approx(kernels::scalar::sum(a.data(), n)).epsilon(1e-13 * scale));

    auto y1 = b, y2 = b;
    kernels::axpy(0.37, a.data(), y1.data(), n);
    kernels::scalar::axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

    kernels::scale(-1.25, y1.data(), n);
    kernels::scalar::scale(-1.25, y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));
  }
}

#ifdef CARNOT_KERNELS_AVX2
TEST_CASE("avx2 kernels match scalar directly when compiled in") {
  Rng rng(5);
  for (std::size_t n : {5, 11, 800}) {
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);
    CHECK(kernels::avx2::dot(a.data(), b.data(), n) ==
          doctest::Approx(kernels::scalar::dot(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(kernels::avx2::squared_distance(a.data(), b.data(), n) ==
          doctest::Approx(kernels::scalar::squared_distance(a.data(), b.data(), n))
              .epsilon(1e-12));
  }
}
#endif

TEST_CASE("rng is reproducible and normal moments are sane") {
  Rng a(99), b(99);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(7);
  double mean = 0.0, var = 0.0;
  const int n = 20000;
  std::vector<double> xs(n);
  for (auto& x : xs) x = c.normal();
  for (double x : xs) mean += x;
  mean /= n;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= n - 1;
  CHECK(std::fabs(mean) < 0.03);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}
