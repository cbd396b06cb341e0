#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "fracap/approximator.hpp"
#include "fracap/spanner.hpp"

using namespace fracap;

namespace {
std::shared_ptr<const RadialEigenpair> base_1d() {
  static auto p = std::make_shared<const RadialEigenpair>(solve_eigenpair(1, 0.5));
  return p;
}

OperatorSpec caloric() { return caloric_spec(0.5, 1); }

OperatorSpec purely_nonlocal() {
  OperatorSpec spec;
  spec.nonlocal_terms = {{1.0, 0.5, 1}};
  spec.validate();
  return spec;
}
}  // namespace

TEST_CASE("ode solution: first order decay") {
  OdeSolution v = ode_solve(1, 1.0, 12);
  for (int i = 0; i <= 12; ++i) CHECK(v.derivs_at_zero[i] == doctest::Approx(i % 2 ? -1.0 : 1.0));
  for (double x : {-0.7, 0.0, 1.3}) CHECK(v.value(x) == doctest::Approx(std::exp(-x)).epsilon(1e-12));
  CHECK(v.deriv(0.0, 7) == doctest::Approx(v.derivs_at_zero[7]).epsilon(1e-12));
}

TEST_CASE("ode solution: second order, both signs") {
  OdeSolution osc = ode_solve(2, 1.0, 9);  // v'' = -v with v(0) = v'(0) = 1
  const double expected[] = {1, 1, -1, -1, 1, 1, -1, -1, 1, 1};
  for (int i = 0; i <= 9; ++i) CHECK(osc.derivs_at_zero[i] == doctest::Approx(expected[i]));
  for (double x : {0.4, 1.9}) {
    CHECK(osc.value(x) == doctest::Approx(std::cos(x) + std::sin(x)).epsilon(1e-12));
    CHECK(std::abs(osc.deriv(x, 2) + osc.value(x)) <= 1e-10);  // residual of the equation
  }

  OdeSolution gro = ode_solve(2, -1.0, 9);  // -v'' = -v with v(0) = v'(0) = 1: e^x
  for (int i = 0; i <= 9; ++i) CHECK(gro.derivs_at_zero[i] == doctest::Approx(1.0));
  CHECK(gro.value(0.8) == doctest::Approx(std::exp(0.8)).epsilon(1e-12));
  CHECK(std::abs(-gro.deriv(0.8, 2) + gro.value(0.8)) <= 1e-10);
}

TEST_CASE("no derivative of the ode solution vanishes at zero") {
  for (int m : {1, 2, 3}) {
    for (double a : {1.0, -1.0}) {
      OdeSolution v = ode_solve(m, a, 20);
      for (int i = 0; i <= 20; ++i) CHECK(std::abs(v.derivs_at_zero[i]) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("plateau cutoff and its radial derivatives") {
  Cutoff tau;  // rho = 1
  CHECK(tau.radial(0.0) == 1.0);
  CHECK(tau.radial(0.5) == 1.0);
  CHECK(tau.radial(0.9) < 1.0);
  CHECK(tau.radial(0.9) > 0.0);
  CHECK(tau.radial(1.0) == 0.0);
  CHECK(tau.radial(2.0) == 0.0);
  CHECK(tau.radial(0.3, 2) == 0.0);  // identically one on the plateau
  CHECK(tau.radial(1.5, 1) == 0.0);
  CHECK(tau.radial(0.8, 1) < 0.0);  // decreasing through the transition
  const double h = 1e-5;
  CHECK(tau.radial(0.8, 1) ==
        doctest::Approx((tau.radial(0.8 + h) - tau.radial(0.8 - h)) / (2 * h)).epsilon(1e-6));
  CHECK_THROWS(tau.radial(0.8, 4));  // transition derivatives stop at 3
  CHECK(tau.radial(0.3, 7) == 0.0);  // but any order is fine off the transition
}

TEST_CASE("rate balancing closes the budget or rejects") {
  OperatorSpec spec = caloric();
  std::vector<double> lamstar = {base_1d()->lambda};
  std::vector<double> t = {1.3};
  RateBalance rb = balance_rates(spec, t, lamstar);
  REQUIRE(rb.accepted);
  REQUIRE(rb.lambda.size() == 1);
  CHECK(rb.lambda[0] == doctest::Approx(1.3).epsilon(1e-14));  // |a| t^m / A

  // two nonlocal blocks: the first is pinned at its base rate, so a small t
  // leaves nothing for the second
  OperatorSpec two;
  two.local_terms = {{1.0, 1}};
  two.nonlocal_terms = {{1.0, 0.5, 1}, {1.0, 0.5, 1}};
  std::vector<double> lam2 = {base_1d()->lambda, base_1d()->lambda};
  std::vector<double> tsmall = {0.3};
  CHECK(!balance_rates(two, tsmall, lam2).accepted);
  std::vector<double> tbig = {3.0};
  RateBalance rb2 = balance_rates(two, tbig, lam2);
  REQUIRE(rb2.accepted);
  CHECK(rb2.lambda[0] == doctest::Approx(base_1d()->lambda));
  CHECK(rb2.lambda[0] + rb2.lambda[1] == doctest::Approx(3.0).epsilon(1e-12));

  // purely nonlocal: every rate is the base rate
  OperatorSpec d0 = purely_nonlocal();
  RateBalance rb0 = balance_rates(d0, {}, {&lamstar[0], 1});
  CHECK(rb0.accepted);
  CHECK(rb0.lambda[0] == doctest::Approx(base_1d()->lambda));
}

namespace {
DictionaryElement sample_element(const OperatorSpec& spec, double t, double rho_y, double ef) {
  auto base = base_1d();
  std::vector<double> lamstar = {base->lambda};
  std::vector<double> tv;
  if (!spec.local_terms.empty()) tv.push_back(t);
  RateBalance rb = balance_rates(spec, tv, lamstar);
  REQUIRE(rb.accepted);
  const double r = std::pow(base->lambda / rb.lambda[0], 1.0);  // (lam*/lam)^{1/(2s)}, s = 1/2
  std::vector<std::vector<double>> dirs = {{r}};
  std::vector<std::vector<double>> offs = {{-rho_y}};
  return build_element(spec, tv, dirs, offs, ef * r, {base});
}
}  // namespace

TEST_CASE("balanced elements are annihilated near the origin") {
  DictionaryElement el = sample_element(caloric(), 1.0, 1.0, 0.2);
  CHECK(std::abs(el.harmonic_defect) <= 1e-12);
  CHECK(el.neighborhood > 0.0);
  CHECK(element_residual(el, 2, 99) <= 1e-6);
}

TEST_CASE("purely nonlocal elements carry their defect") {
  DictionaryElement el = sample_element(purely_nonlocal(), 0.0, 1.0, 0.2);
  CHECK(el.harmonic_defect == doctest::Approx(base_1d()->lambda).epsilon(1e-12));
  CHECK(element_residual(el, 2, 99) <= 1e-6);
}

TEST_CASE("element values factor on the plateau") {
  DictionaryElement el = sample_element(caloric(), 1.0, 1.0, 0.2);
  std::vector<double> p = {0.03, -0.05};
  const double expect = el.ode[0].value(el.t[0] * p[0]) *
                        el.phis[0].value(std::abs(p[1] + el.centers[0][0]));
  CHECK(el.value(p) == doctest::Approx(expect).epsilon(1e-12));

  // far outside the cutoff: zero
  std::vector<double> far = {5.0, 0.0};
  CHECK(el.value(far) == 0.0);
  // outside the shifted eigenfunction support: zero
  std::vector<double> outside = {0.0, 3.0};
  CHECK(el.value(outside) == 0.0);
}

TEST_CASE("element partials match finite differences off the plateau") {
  DictionaryElement el = sample_element(caloric(), 1.0, 1.0, 0.2);
  std::vector<double> p = {0.52, 0.31};  // inside the cutoff transition
  std::vector<int> orders = {1, 1};
  const double h = 1e-4;
  auto at = [&](double a, double b) {
    std::vector<double> q = {a, b};
    return el.value(q);
  };
  const double fd = ((at(p[0] + h, p[1] + h) - at(p[0] + h, p[1] - h)) -
                     (at(p[0] - h, p[1] + h) - at(p[0] - h, p[1] - h))) /
                    (4 * h * h);
  CHECK(el.partial(p, orders) == doctest::Approx(fd).epsilon(1e-4));
}

TEST_CASE("element construction validates geometry") {
  auto base = base_1d();
  OperatorSpec spec = caloric();
  std::vector<double> t = {base->lambda};  // balanced rate = base rate, radius 1
  const double r = 1.0;
  std::vector<std::vector<double>> good_dir = {{r}};
  std::vector<std::vector<double>> bad_dir = {{0.5 * r}};
  std::vector<std::vector<double>> inward = {{-1.0}};
  std::vector<std::vector<double>> outward = {{1.0}};
  CHECK_NOTHROW(build_element(spec, t, good_dir, inward, 0.1, {base}));
  CHECK_THROWS_AS(build_element(spec, t, bad_dir, inward, 0.1, {base}), std::invalid_argument);
  CHECK_THROWS_AS(build_element(spec, t, good_dir, outward, 0.1, {base}), std::invalid_argument);
  // shift pushed past the support sphere
  std::vector<std::vector<double>> huge = {{-60.0}};
  CHECK_THROWS_AS(build_element(spec, t, good_dir, huge, 0.1, {base}), std::invalid_argument);
}

TEST_CASE("multi-index enumeration is graded") {
  auto idx = multi_indices_upto(2, 3);
  REQUIRE(idx.size() == 10);
  CHECK(idx[0] == std::vector<int>{0, 0});
  int prev = 0;
  for (const auto& i : idx) {
    const int total = i[0] + i[1];
    CHECK(total >= prev);
    prev = total;
  }
  CHECK(multi_indices_upto(1, 5).size() == 6);
  CHECK(multi_indices_upto(3, 2).size() == 10);
}

TEST_CASE("dictionary sampling is deterministic and respects bounds") {
  auto dict = sample_dictionary(caloric(), {base_1d()});
  auto dict2 = sample_dictionary(caloric(), {base_1d()});
  REQUIRE(!dict.empty());
  CHECK(dict.size() <= 500);
  REQUIRE(dict.size() == dict2.size());
  for (size_t i = 0; i < dict.size(); ++i) {
    CHECK(dict[i].t == dict2[i].t);
    CHECK(dict[i].eps == dict2[i].eps);
    const double r = std::hypot(dict[i].directions[0][0], 0.0);
    CHECK(std::abs(dict[i].centers[0][0]) < r);
  }
  DictionaryPolicy tiny;
  tiny.max_elements = 5;
  CHECK(sample_dictionary(caloric(), {base_1d()}, tiny).size() == 5);
}

TEST_CASE("derivative matrix spans all low orders") {
  auto dict = sample_dictionary(caloric(), {base_1d()});
  int prev_rank = 0;
  for (int K = 0; K <= 3; ++K) {
    DerivativeMatrix mat = assemble_matrix(dict, K);
    CHECK(mat.cols() == (K + 1) * (K + 2) / 2);
    CHECK(mat.numerical_rank() == mat.cols());  // full rank at every order up to 3
    CHECK(mat.numerical_rank() >= prev_rank);
    prev_rank = mat.numerical_rank();
  }

  // one-hot targets are reproduced by the solved combination
  DerivativeMatrix mat = assemble_matrix(dict, 2);
  for (int j = 0; j < mat.cols(); ++j) {
    std::vector<double> target(mat.cols(), 0.0);
    target[j] = 1.0;
    auto c = span_solve(mat, target);
    REQUIRE(c.size() == dict.size());
    Eigen::VectorXd cv = Eigen::Map<Eigen::VectorXd>(c.data(), c.size());
    Eigen::VectorXd achieved = mat.rows.transpose() * cv;
    for (int i = 0; i < mat.cols(); ++i) CHECK(std::abs(achieved[i] - target[i]) <= 1e-9);
  }
}

TEST_CASE("duplicated elements do not change the rank") {
  auto dict = sample_dictionary(caloric(), {base_1d()});
  const int r1 = assemble_matrix(dict, 2).numerical_rank();
  auto doubled = dict;
  doubled.insert(doubled.end(), dict.begin(), dict.end());
  CHECK(assemble_matrix(doubled, 2).numerical_rank() == r1);
}

TEST_CASE("span failures surface as typed errors") {
  auto dict = sample_dictionary(caloric(), {base_1d()});
  std::vector<DictionaryElement> one = {dict.front()};
  DerivativeMatrix mat = assemble_matrix(one, 2);
  std::vector<double> target(mat.cols(), 0.0);
  target[3] = 1.0;
  bool threw = false;
  try {
    span_solve(mat, target);
  } catch (const SpanRankError& e) {
    threw = true;
    CHECK(e.residual > 0.0);
  }
  CHECK(threw);

  // the zero target is always solvable, by the zero combination
  std::vector<double> zero(mat.cols(), 0.0);
  auto c = span_solve(mat, zero);
  for (double v : c) CHECK(v == 0.0);
}
