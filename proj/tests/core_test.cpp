#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fracap/config.hpp"
#include "fracap/constants.hpp"
#include "fracap/csv.hpp"
#include "fracap/interp.hpp"
#include "fracap/quadrature.hpp"

using namespace fracap;

TEST_CASE("gamma agrees with the standard library") {
  for (double z : {0.05, 0.3, 0.5, 1.0, 1.5, 2.0, 3.7, 7.5, 12.25, 31.0, 49.5}) {
    CHECK(gamma_fn(z) == doctest::Approx(std::tgamma(z)).epsilon(1e-12));
  }
  // reflection below 1/2
  const double z = 0.3;
  CHECK(gamma_fn(z) * gamma_fn(1 - z) == doctest::Approx(M_PI / std::sin(M_PI * z)).epsilon(1e-13));
}

TEST_CASE("operator and kernel constants against direct formulas") {
  for (int n : {1, 2}) {
    for (double s : {0.3, 0.5, 0.7, 0.9}) {
      const double cns = std::pow(4.0, s) * s * std::tgamma(0.5 * n + s) /
                         (std::pow(M_PI, 0.5 * n) * std::tgamma(1.0 - s));
      CHECK(normalization_constant(n, s) == doctest::Approx(cns).epsilon(1e-12));
      const double kns = std::tgamma(0.5 * n) /
                         (std::pow(4.0, s) * std::pow(M_PI, 0.5 * n) * std::pow(std::tgamma(s), 2));
      CHECK(green_constant(n, s) == doctest::Approx(kns).epsilon(1e-12));
    }
  }
  CHECK(normalization_constant(1, 0.5) == doctest::Approx(1.0 / M_PI).epsilon(1e-14));
  CHECK(green_constant(1, 0.5) == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-14));
  CHECK(sphere_measure(1) == doctest::Approx(2.0));
  CHECK(sphere_measure(2) == doctest::Approx(2.0 * M_PI));
}

TEST_CASE("gauss-legendre rules integrate polynomials exactly") {
  for (int n : {4, 16, 32}) {
    const auto& xs = gl_nodes(n);
    const auto& ws = gl_weights(n);
    REQUIRE(xs.size() == size_t(n));
    double wsum = 0.0;
    for (double w : ws) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    // exact degree 2n-1
    const int k = 2 * n - 2;  // even power, nonzero integral
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += ws[i] * std::pow(xs[i], k);
    CHECK(acc == doctest::Approx(2.0 / (k + 1)).epsilon(1e-12));
    for (int i = 0; i < n; ++i) CHECK(xs[i] == doctest::Approx(-xs[n - 1 - i]).epsilon(1e-13));
  }
}

TEST_CASE("graded mesh brackets endpoints and refines toward breaks") {
  std::vector<double> breaks = {0.5};
  auto mesh = graded_mesh(0.0, 1.0, breaks, true, true, 20, 1e-9);
  REQUIRE(mesh.size() >= 4);
  CHECK(mesh.front() == doctest::Approx(0.0));
  CHECK(mesh.back() == doctest::Approx(1.0));
  for (size_t i = 0; i + 1 < mesh.size(); ++i) CHECK(mesh[i] < mesh[i + 1]);
  double near_break = 1.0;
  for (size_t i = 0; i + 1 < mesh.size(); ++i)
    if (mesh[i] <= 0.5 && 0.5 <= mesh[i + 1]) near_break = mesh[i + 1] - mesh[i];
  CHECK(near_break < 1e-6);
}

TEST_CASE("graded quadrature handles endpoint singularities") {
  QuadratureConfig q;
  // raw graded panels (no endpoint substitution): integrable singularities come
  // out with error set by the deepest panel
  const double v1 = integrate_graded([](double t) { return 1.0 / std::sqrt(t); }, 0.0, 1.0, {}, q);
  CHECK(v1 == doctest::Approx(2.0).epsilon(1e-5));
  const double v2 = integrate_graded([](double t) { return std::log(t); }, 0.0, 1.0, {}, q);
  CHECK(v2 == doctest::Approx(-1.0).epsilon(1e-8));
  std::vector<double> breaks = {0.0};
  const double v3 = integrate_graded([](double t) { return std::pow(std::abs(t), 0.3); }, -1.0, 1.0,
                                     breaks, q);
  CHECK(v3 == doctest::Approx(2.0 / 1.3).epsilon(1e-8));
}

TEST_CASE("evaluation budget flags exhaustion") {
  EvalBudget b;
  b.cap = 100;
  b.charge(60);
  CHECK(!b.exceeded);
  b.charge(60);
  CHECK(b.exceeded);
  CHECK(b.used == 120);
}

TEST_CASE("pchip interpolates and preserves monotone data") {
  std::vector<double> xs = {0.0, 1.0, 2.0, 3.0};
  std::vector<double> ys = {0.0, 1.0, 4.0, 9.0};
  PchipCurve c(xs, ys);
  for (size_t i = 0; i < xs.size(); ++i) CHECK(c(xs[i]) == doctest::Approx(ys[i]).epsilon(1e-14));
  double prev = -1.0;
  for (double x = 0.0; x <= 3.0; x += 0.01) {
    CHECK(c(x) >= prev - 1e-12);
    prev = c(x);
  }
  // derivative consistent with a finite difference away from the nodes
  const double h = 1e-6;
  CHECK(c.deriv(1.5, 1) == doctest::Approx((c(1.5 + h) - c(1.5 - h)) / (2 * h)).epsilon(1e-5));
}

TEST_CASE("pchip honors clamped end slopes") {
  PchipCurve c({0.0, 1.0, 2.0}, {0.0, 0.5, 1.0}, 0.0);
  CHECK(c.deriv(0.0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("config parsing and typed lookup") {
  ConfigMap m = parse_config_text("a = 1.5\n# comment\nflag=true\nname = run7\n\ncount=42\n");
  CHECK(config_get(m, "a", 0.0) == doctest::Approx(1.5));
  CHECK(config_get(m, "flag", false) == true);
  CHECK(config_get(m, "name", std::string("x")) == "run7");
  CHECK(config_get(m, "count", 0) == 42);
  CHECK(config_get(m, "missing", 7L) == 7L);

  QuadratureConfig q;
  apply_config(parse_config_text("quad.radial_nodes=24\nquad.endpoint_map=squared\n"
                                 "quad.truncation_radius=128\n"),
               q);
  CHECK(q.radial_nodes == 24);
  CHECK(q.truncation_radius == doctest::Approx(128.0));
  CHECK(q.endpoint_map == QuadratureConfig::EndpointMap::squared);
  CHECK_THROWS(apply_config(parse_config_text("quad.radial_nodes=notanumber\n"), q));
}

TEST_CASE("fnv1a matches the published test vectors") {
  CHECK(fnv1a("") == 14695981039346656037ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("g17 formatting round-trips doubles") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -0.0, 2.0}) {
    CHECK(std::strtod(format_g17(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("csv digest tracks the data section") {
  CsvTable t;
  t.comments = {"note"};
  t.header = {"x", "y"};
  t.rows = {{1.0, 2.0}, {3.0, 4.0}};
  const auto d1 = csv_digest(t);
  t.rows[1][1] = 4.5;
  CHECK(csv_digest(t) != d1);

  const std::string text = csv_serialize(t);
  CHECK(text.find("x,y") != std::string::npos);
  CHECK(text.find("# digest=") != std::string::npos);

  const auto path = std::filesystem::temp_directory_path() / "fracap_core_test.csv";
  csv_write(t, path.string());
  std::ifstream in(path);
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(contents == text);
  std::filesystem::remove(path);
}

TEST_CASE("manifest serialization carries params") {
  RunManifest man;
  man.command = "demo";
  man.params = {{"s", "0.5"}, {"n", "1"}};
  man.csv_digest_hex = "abc";
  const std::string j = man.serialize();
  CHECK(j.find("\"demo\"") != std::string::npos);
  CHECK(j.find("\"s\"") != std::string::npos);
  CHECK(j.find("abc") != std::string::npos);
}
