#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "honem/kernels.hpp"
#include "honem/rng.hpp"

using honem::kernels::Ops;

namespace {

std::vector<double> random_vec(std::mt19937_64& g, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = honem::rng::uniform01(g) * 2.0 - 1.0;
  return v;
}

struct ForceGuard {
  ~ForceGuard() { honem::kernels::force("auto"); }
};

}  // namespace

TEST_CASE("scalar dot on fixed values") {
  const Ops& k = honem::kernels::scalar_ops();
  const double a[] = {1.0, 2.0, 3.0};
  const double b[] = {4.0, -5.0, 6.0};
  CHECK(k.dot(a, b, 3) == 12.0);
  CHECK(k.dot(a, b, 0) == 0.0);
  CHECK(k.dot(a, b, 1) == 4.0);
}

TEST_CASE("scalar axpy and scal on fixed values") {
  const Ops& k = honem::kernels::scalar_ops();
  double y[] = {1.0, 1.0, 1.0, 1.0};
  const double x[] = {1.0, 2.0, 3.0, 4.0};
  k.axpy(0.5, x, y, 4);
  CHECK(y[0] == 1.5);
  CHECK(y[1] == 2.0);
  CHECK(y[2] == 2.5);
  CHECK(y[3] == 3.0);
  k.scal(-2.0, y, 4);
  CHECK(y[0] == -3.0);
  CHECK(y[3] == -6.0);
  k.axpy(1.0, x, y, 0);  // no-op
  CHECK(y[0] == -3.0);
}

TEST_CASE("scalar sparse_dot gathers by index") {
  const Ops& k = honem::kernels::scalar_ops();
  const double vals[] = {2.0, 3.0, 4.0};
  const std::uint32_t idx[] = {5, 0, 5};
  const double x[] = {10.0, 0.0, 0.0, 0.0, 0.0, 1.0};
  // 2*x[5] + 3*x[0] + 4*x[5]
  CHECK(k.sparse_dot(vals, idx, x, 3) == 36.0);
  CHECK(k.sparse_dot(vals, idx, x, 0) == 0.0);
}

TEST_CASE("simd variants agree with scalar across lengths") {
  const Ops* simd = honem::kernels::simd_ops();
  if (simd == nullptr) return;  // scalar-only build

  std::mt19937_64 g(20240817);
  for (std::size_t n = 0; n <= 67; ++n) {
    std::vector<double> a = random_vec(g, n);
    std::vector<double> b = random_vec(g, n);

    const double ds = honem::kernels::scalar_ops().dot(a.data(), b.data(), n);
    const double dv = simd->dot(a.data(), b.data(), n);
    double mag = 1.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(ds - dv) <= 1e-12 * mag);

    std::vector<double> ys = random_vec(g, n);
    std::vector<double> yv = ys;
    const double alpha = honem::rng::uniform01(g) * 4.0 - 2.0;
    honem::kernels::scalar_ops().axpy(alpha, a.data(), ys.data(), n);
    simd->axpy(alpha, a.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(ys[i] - yv[i]) <=
            1e-15 * (std::abs(ys[i]) + std::abs(alpha * a[i]) + 1.0));

    std::vector<double> xs = random_vec(g, n);
    std::vector<double> xv = xs;
    honem::kernels::scalar_ops().scal(alpha, xs.data(), n);
    simd->scal(alpha, xv.data(), n);
    CHECK(xs == xv);  // plain multiply rounds identically

    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
      idx[i] = static_cast<std::uint32_t>(honem::rng::bounded(g, 64));
    std::vector<double> gather = random_vec(g, 64);
    const double ss = honem::kernels::scalar_ops().sparse_dot(
        a.data(), idx.data(), gather.data(), n);
    const double sv = simd->sparse_dot(a.data(), idx.data(), gather.data(), n);
    CHECK(std::abs(ss - sv) <= 1e-12 * (1.0 + std::abs(ss)));
  }
}

TEST_CASE("force selects backends and rejects unknown names") {
  ForceGuard guard;
  honem::kernels::force("scalar");
  CHECK(std::string(honem::kernels::active().name) == "scalar");

  CHECK_THROWS_AS(honem::kernels::force("mmx"), std::invalid_argument);

  const Ops* simd = honem::kernels::simd_ops();
  if (simd != nullptr) {
    honem::kernels::force(simd->name);
    CHECK(std::string(honem::kernels::active().name) == simd->name);
    const std::string other =
        std::string(simd->name) == "avx2" ? "neon" : "avx2";
    CHECK_THROWS_AS(honem::kernels::force(other), std::invalid_argument);
  } else {
    CHECK_THROWS_AS(honem::kernels::force("avx2"), std::invalid_argument);
    CHECK_THROWS_AS(honem::kernels::force("neon"), std::invalid_argument);
  }

  honem::kernels::force("auto");
  const char* expect = simd != nullptr ? simd->name : "scalar";
  CHECK(std::string(honem::kernels::active().name) == expect);
}

TEST_CASE("active dispatch helpers forward to the active backend") {
  ForceGuard guard;
  honem::kernels::force("scalar");
  const double a[] = {1.0, 2.0};
  const double b[] = {3.0, 4.0};
  CHECK(honem::kernels::dot(a, b, 2) == 11.0);
  double y[] = {0.0, 0.0};
  honem::kernels::axpy(2.0, a, y, 2);
  CHECK(y[1] == 4.0);
  honem::kernels::scal(0.5, y, 2);
  CHECK(y[0] == 1.0);
  const std::uint32_t idx[] = {1};
  CHECK(honem::kernels::sparse_dot(a, idx, b, 1) == 4.0);
}
