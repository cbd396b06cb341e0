#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "fracap/approximator.hpp"
#include "fracap/fracop.hpp"

using namespace fracap;

namespace {
std::vector<std::shared_ptr<const RadialEigenpair>> bases_1d() {
  static auto p = std::make_shared<const RadialEigenpair>(solve_eigenpair(1, 0.5));
  return {p};
}

ApproximatorConfig quick_cfg() {
  ApproximatorConfig cfg;
  cfg.grid_per_axis = 9;
  cfg.residual_samples = 2;
  return cfg;
}
}  // namespace

TEST_CASE("scaling plans") {
  OperatorSpec cal = caloric_spec(0.5, 1);
  // x^2 in the space axis: gamma = 2, all exponents 1, spanning order 5
  ApproximationPlan p = make_plan(cal, {0, 2}, 0);
  CHECK(p.gamma == doctest::Approx(2.0));
  CHECK(p.mu == doctest::Approx(1.0));
  CHECK(p.K_o == 3);
  CHECK(p.K == 5);
  // t: gamma = 1
  ApproximationPlan pt = make_plan(cal, {1, 0}, 0);
  CHECK(pt.gamma == doctest::Approx(1.0));
  CHECK(pt.K_o == 2);
  CHECK(pt.K == 3);
  // extra derivatives enlarge the order
  CHECK(make_plan(cal, {1, 0}, 2).K == 5);

  // anisotropic scaling: s = 0.25 makes the nonlocal axis shrink faster
  OperatorSpec skew = caloric_spec(0.25, 1);
  auto f = scale_factors(skew, 0.5);
  CHECK(f[0] == doctest::Approx(0.5));         // eta^{1/m}
  CHECK(f[1] == doctest::Approx(0.25));        // eta^{1/(2s)}
  ApproximationPlan ps = make_plan(skew, {0, 1}, 0);
  CHECK(ps.gamma == doctest::Approx(2.0));     // |I|/(2s) = 2
  CHECK(ps.mu == doctest::Approx(1.0));        // slowest axis: min(1/m, 1/(2s)) = min(1, 2)
  CHECK(ps.K_o == 3);                          // ceil((gamma + 1) / mu)
}

TEST_CASE("monomial self-similarity under the anisotropic dilation") {
  OperatorSpec cal = caloric_spec(0.5, 1);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (const auto& iota : {std::vector<int>{0, 2}, std::vector<int>{1, 1}, std::vector<int>{2, 0}}) {
    ApproximationPlan plan = make_plan(cal, iota, 0);
    for (double eta : {0.25, 0.0625}) {
      auto S = scale_factors(cal, eta);
      for (int rep = 0; rep < 5; ++rep) {
        const double x = U(rng), X = U(rng);
        const double f = std::pow(x, iota[0]) * std::pow(X, iota[1]);
        const double scaled =
            std::pow(eta, -plan.gamma) * std::pow(S[0] * x, iota[0]) * std::pow(S[1] * X, iota[1]);
        CHECK(std::abs(scaled - f) <= 1e-12 * std::max(1.0, std::abs(f)));
      }
    }
  }
}

TEST_CASE("zero polynomial gives the exact zero field") {
  OperatorSpec cal = caloric_spec(0.5, 1);
  std::vector<Monomial> none;
  auto r = approximate_polynomial(cal, none, 0, 0.05, bases_1d(), quick_cfg());
  CHECK(r.met);
  CHECK(r.stages.empty());
  CHECK(r.achieved_ck_error == 0.0);
  std::vector<double> p = {0.3, -0.2};
  CHECK(r.value(p) == 0.0);

  // zero coefficients are dropped, not spanned
  std::vector<Monomial> zero_mono = {{0.0, {0, 2}}};
  auto r2 = approximate_polynomial(cal, zero_mono, 0, 0.05, bases_1d(), quick_cfg());
  CHECK(r2.met);
  CHECK(r2.stages.empty());
}

TEST_CASE("linear space-time targets are reached and annihilated") {
  OperatorSpec cal = caloric_spec(0.5, 1);
  auto res = approximate_monomial(cal, {1, 0}, 0, 0.05, bases_1d(), quick_cfg());
  CHECK(res.met);
  CHECK(res.achieved_ck_error <= 0.05);
  CHECK(res.k == 0);
  CHECK(res.plan.K == 3);

  // the field is close to f(t, x) = t on the box
  std::vector<double> p = {0.4, 0.2};
  CHECK(std::abs(res.value(p) - 0.4) <= 0.06);
  std::vector<double> q = {-0.5, -0.6};
  CHECK(std::abs(res.value(q) + 0.5) <= 0.06);

  // compactly supported
  std::vector<double> far = {res.support_radius * 1.05, 0.0};
  CHECK(res.value(far) == 0.0);
  CHECK(res.region_radius > 0.0);

  // measured operator residual on the guarantee region
  CHECK(res.lambda_residual <= 1e-3);
}

TEST_CASE("rescaling commutes with the operator") {
  OperatorSpec cal = caloric_spec(0.5, 1);
  auto res = approximate_monomial(cal, {1, 0}, 0, 0.05, bases_1d(), quick_cfg());
  REQUIRE(res.stages.size() == 1);
  const auto& st = res.stages[0];
  const double eta = st.plan.eta;
  const double gamma = st.plan.gamma;

  // unscaled combination of the same dictionary elements
  ApproximationResult flat = res;
  flat.stages[0].plan.eta = 1.0;
  flat.stages[0].coef = 1.0;

  ScalarField uf = res.as_field();
  ScalarField wf = flat.as_field();
  auto S = scale_factors(cal, eta);
  std::vector<double> y = {0.11, -0.07};
  std::vector<double> Sy = {S[0] * y[0], S[1] * y[1]};
  const double lhs = std::pow(eta, gamma) / st.coef * lambda_residual_at(cal, uf, y).value;
  const double rhs = eta * lambda_residual_at(cal, wf, Sy).value;
  CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max(1.0, std::abs(rhs)));
}

TEST_CASE("single-monomial polynomials behave like the monomial route") {
  OperatorSpec cal = caloric_spec(0.5, 1);
  std::vector<Monomial> monos = {{2.0, {1, 0}}};
  auto res = approximate_polynomial(cal, monos, 0, 0.1, bases_1d(), quick_cfg());
  CHECK(res.met);
  CHECK(res.achieved_ck_error <= 0.1);
  std::vector<double> p = {0.35, 0.1};
  CHECK(std::abs(res.value(p) - 0.7) <= 0.12);
  REQUIRE(res.stages.size() == 1);
  CHECK(res.stages[0].coef == doctest::Approx(2.0));  // coef * iota!
}

TEST_CASE("eta sweep errors shrink as eta does") {
  OperatorSpec cal = caloric_spec(0.5, 1);
  std::vector<double> etas = {0.25, 0.125, 0.0625};
  auto rows = eta_error_sweep(cal, {1, 0}, 0, etas, bases_1d(), quick_cfg());
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].first == doctest::Approx(0.25));
  CHECK(rows[1].second < rows[0].second);
  CHECK(rows[2].second < rows[1].second);
}

TEST_CASE("function route fits a polynomial surrogate first") {
  OperatorSpec cal = caloric_spec(0.5, 1);
  ScalarField f;
  f.dim = 2;
  f.support_radius = 100.0;
  f.smooth_radius = 100.0;
  f.eval = [](std::span<const double> x) { return 0.5 + x[0]; };
  auto res = approximate_function(cal, f, 0, 0.1, bases_1d(), quick_cfg());
  CHECK(res.met);
  CHECK(res.achieved_ck_error <= 0.1);
  std::vector<double> p = {0.2, -0.3};
  CHECK(std::abs(res.value(p) - 0.7) <= 0.12);
}

TEST_CASE("non-polynomial targets exhaust a tiny fit budget") {
  OperatorSpec cal = caloric_spec(0.5, 1);
  ScalarField f;
  f.dim = 2;
  f.support_radius = 100.0;
  f.smooth_radius = 100.0;
  f.eval = [](std::span<const double> x) { return std::exp(3.0 * x[0] * x[1]); };
  ApproximatorConfig cfg = quick_cfg();
  cfg.max_fit_degree = 1;
  CHECK_THROWS_AS(approximate_function(cal, f, 0, 1e-4, bases_1d(), cfg), FitBudgetError);
}

TEST_CASE("results serialize and reload") {
  OperatorSpec cal = caloric_spec(0.5, 1);
  auto res = approximate_monomial(cal, {1, 0}, 0, 0.05, bases_1d(), quick_cfg());
  const std::string j = result_to_json(res);
  CHECK(j.find("stages") != std::string::npos);

  ApproximationResult back = result_from_json(j);
  CHECK(back.met == res.met);
  CHECK(back.k == res.k);
  CHECK(back.achieved_ck_error == doctest::Approx(res.achieved_ck_error).epsilon(1e-14));
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-0.6, 0.6);
  for (int i = 0; i < 5; ++i) {
    std::vector<double> p = {U(rng), U(rng)};
    CHECK(back.value(p) == doctest::Approx(res.value(p)).epsilon(1e-10));
  }

  CHECK_THROWS(result_from_json("{\"not\": \"a result\"}"));
}
