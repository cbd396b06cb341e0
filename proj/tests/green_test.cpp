#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fracap/green.hpp"

using namespace fracap;

namespace {
double closed_form_1d_half(double x, double z) {
  return 2.0 * std::log((1.0 - x * z + std::sqrt((1 - x * x) * (1 - z * z))) / std::abs(z - x));
}
}  // namespace

TEST_CASE("distance ratio r0") {
  GreenKernel k{1, 0.5, {}};
  std::vector<double> x = {0.0}, z = {0.5};
  CHECK(r0(x, z) == doctest::Approx(0.75 / 0.25).epsilon(1e-14));
  std::vector<double> x2 = {0.3, 0.0}, z2 = {0.0, -0.4};
  const double expect = (1 - 0.09) * (1 - 0.16) / 0.25;
  CHECK(r0(x2, z2) == doctest::Approx(expect).epsilon(1e-14));
  (void)k;
}

TEST_CASE("kernel matches the 1-d half-order closed form") {
  GreenKernel k{1, 0.5, {}};
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-0.99, 0.99);
  for (int i = 0; i < 40; ++i) {
    double x = U(rng), z = U(rng);
    if (std::abs(x - z) < 1e-5) continue;
    const double g = green_value(k, {&x, 1}, {&z, 1});
    CHECK(g == doctest::Approx(closed_form_1d_half(x, z)).epsilon(1e-10));
  }
}

TEST_CASE("kernel symmetry and positivity") {
  for (double s : {0.3, 0.7}) {
    GreenKernel k1{1, s, {}};
    std::vector<double> x = {0.2}, z = {-0.6};
    const double a = green_value(k1, x, z), b = green_value(k1, z, x);
    CHECK(a > 0.0);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
  GreenKernel k2{2, 0.5, {}};
  std::vector<double> x2 = {0.2, 0.1}, z2 = {-0.3, 0.4};
  const double a2 = green_value(k2, x2, z2);
  CHECK(a2 > 0.0);
  CHECK(a2 == doctest::Approx(green_value(k2, z2, x2)).epsilon(1e-12));
  // monotone in separation along a fixed direction
  std::vector<double> znear = {0.25, 0.1};
  CHECK(green_value(k2, x2, znear) > a2);
}

TEST_CASE("series split reproduces the kernel near the diagonal and boundary") {
  GreenKernel k{2, 0.35, {}};
  std::vector<double> x = {0.995, 0.0}, z = {0.9, 0.05};  // r0 small: series branch
  REQUIRE(r0(x, z) < 0.5);
  const SeriesSplit split = green_series_split(k, x, z);
  CHECK(split.tail == 0.0);
  CHECK(split.total() == doctest::Approx(green_value(k, x, z)).epsilon(1e-11));

  std::vector<double> xm = {0.2, 0.0}, zm = {-0.1, 0.2};  // r0 large: tail active
  REQUIRE(r0(xm, zm) > 0.5);
  const SeriesSplit split2 = green_series_split(k, xm, zm);
  CHECK(split2.tail > 0.0);
  CHECK(split2.total() == doctest::Approx(green_value(k, xm, zm)).epsilon(1e-11));
}

TEST_CASE("series coefficients") {
  for (int n : {1, 2}) {
    for (double s : {0.3, 0.5, 0.8}) {
      CHECK(green_series_coefficient(n, s, 0) == doctest::Approx(1.0 / s).epsilon(1e-14));
      CHECK(green_series_coefficient(n, s, 1) ==
            doctest::Approx(-0.5 * n / (1.0 + s)).epsilon(1e-14));
      const double b2 = 0.5 * (0.5 * n) * (0.5 * n + 1.0);
      CHECK(green_series_coefficient(n, s, 2) == doctest::Approx(b2 / (2.0 + s)).epsilon(1e-14));
    }
  }
}

TEST_CASE("radial integral: series branch vs pure quadrature") {
  QuadratureConfig q;
  for (int n : {1, 2}) {
    for (double s : {0.3, 0.5, 0.7}) {
      for (double r0v : {0.05, 0.4, 2.0, 30.0}) {
        const double a = green_radial_integral(n, s, r0v, q);
        const double b = green_quadrature_reference(n, s, r0v, q);
        CHECK(a == doctest::Approx(b).epsilon(1e-8));
      }
    }
  }
  // alternative endpoint substitution agrees
  QuadratureConfig q2;
  q2.endpoint_map = QuadratureConfig::EndpointMap::squared;
  CHECK(green_quadrature_reference(1, 0.5, 1.7, q2) ==
        doctest::Approx(green_quadrature_reference(1, 0.5, 1.7, q)).epsilon(1e-8));
}

TEST_CASE("boundary functional is positive for inward directions") {
  GreenKernel k{1, 0.5, {}};
  ScalarField f = make_bump_field(1, {0.0}, 0.5);
  std::vector<double> e = {1.0}, w = {-1.0};
  CHECK(boundary_functional(k, f, e, w) > 0.0);
}

TEST_CASE("boundary limit ratio approaches one") {
  GreenKernel k{1, 0.5, {}};
  ScalarField f = make_bump_field(1, {0.0}, 0.5);
  std::vector<double> e = {1.0}, w = {-1.0};
  std::vector<double> eps = {1e-3, 1e-4};
  GoaTable t = verify_goa_limit(k, f, e, w, eps);
  REQUIRE(t.rows.size() == 2);
  CHECK(!t.degenerate);
  CHECK(t.rows[1].ratio == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(std::abs(t.rows[1].ratio - 1.0) <= std::abs(t.rows[0].ratio - 1.0) + 1e-3);
  CHECK(t.rows[0].rhs == doctest::Approx(t.rows[1].rhs));  // eps-independent side
}
