// end-to-end acceptance checks; one line per criterion, nonzero exit on failure
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <vector>

#include "fracap/approximator.hpp"
#include "fracap/fracop.hpp"
#include "fracap/green.hpp"
#include "fracap/poisson.hpp"
#include "fracap/spanner.hpp"

using namespace fracap;
using Clock = std::chrono::steady_clock;

namespace {

bool all_ok = true;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const char* what, bool ok, const std::string& detail, double wall) {
  std::printf("ACCEPTANCE %2d %-34s %s  (%s, %.1fs)\n", id, what, ok ? "PASS" : "FAIL",
              detail.c_str(), wall);
  std::fflush(stdout);
  all_ok = all_ok && ok;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// 1: 1-d half-order kernel against the log closed form
void criterion_1() {
  const auto t0 = Clock::now();
  GreenKernel k{1, 0.5, {}};
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> U(-0.999, 0.999);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    double x = U(rng), z = U(rng);
    while (std::abs(x - z) < 1e-6) z = U(rng);
    const double g = green_value(k, {&x, 1}, {&z, 1});
    const double closed =
        2.0 * std::log((1.0 - x * z + std::sqrt((1 - x * x) * (1 - z * z))) / std::abs(z - x));
    worst = std::max(worst, std::abs(g - closed) / std::abs(closed));
  }
  const double wall = seconds_since(t0);
  report(1, "kernel closed form (n=1, s=1/2)", worst <= 1e-8 && wall < 5.0,
         fmt("max_rel=%.2e", worst), wall);
}

// 2: boundary-limit ratio for three fractional orders
void criterion_2() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  ScalarField f = make_bump_field(1, {0.0}, 0.5);
  std::vector<double> e = {1.0}, w = {-1.0};
  std::vector<double> eps = {1e-2, 1e-3, 1e-4};
  for (double s : {0.3, 0.5, 0.7}) {
    GreenKernel k{1, s, {}};
    GoaTable t = verify_goa_limit(k, f, e, w, eps);
    ok = ok && !t.degenerate;
    const double last = t.rows.back().ratio;
    ok = ok && last >= 0.98 && last <= 1.02;
    for (size_t i = 1; i < t.rows.size(); ++i)
      ok = ok && std::abs(t.rows[i].ratio - 1.0) <= std::abs(t.rows[i - 1].ratio - 1.0) + 1e-3;
    detail += fmt("s=%.1f:%.4f ", s, last);
  }
  const double wall = seconds_since(t0);
  report(2, "boundary limit ratios", ok && wall < 60.0, detail, wall);
}

// 3: source computed by the singular-integral route, solved back by the kernel
void criterion_3() {
  const auto t0 = Clock::now();
  const double s = 0.5;
  ScalarField profile = make_ms_profile(1, s);
  double cmin = 1e300, cmax = -1e300;
  for (double r : {0.0, 0.25, 0.55}) {
    std::vector<double> x = {r};
    const double v = frac_laplacian_at(profile, x, s).value;
    cmin = std::min(cmin, v), cmax = std::max(cmax, v);
  }
  const double c = 0.5 * (cmin + cmax);
  const bool flat = (cmax - cmin) <= 1e-5 * std::abs(c);

  ScalarField source;
  source.dim = 1;
  source.support_radius = 1.0;
  source.smooth_radius = 0.999;
  source.eval = [c](std::span<const double> z) { return std::abs(z[0]) < 1.0 ? c : 0.0; };

  DirichletSolver ds(1, s);
  double worst = 0.0;
  for (double r : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    std::vector<double> x = {r};
    const double u = dirichlet_value(ds, source, x);
    const double exact = std::pow(1 - r * r, s);
    worst = std::max(worst, std::abs(u - exact) / exact);
  }
  const double wall = seconds_since(t0);
  report(3, "representation round trip", flat && worst <= 1e-3 && wall < 60.0,
         fmt("max_rel=%.2e spread=%.1e", worst, cmax - cmin), wall);
}

// 4: eigenpair residual, grid self-convergence, boundary decay exponent
void criterion_4(const RadialEigenpair& pair) {
  const auto t0 = Clock::now();
  std::vector<double> radii = {0.1, 0.3, 0.5, 0.7, 0.9};
  auto rows = verify_eigen_residual(pair, radii, QuadratureConfig{});
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.residual);
  const bool res_ok = worst <= 1e-3 * pair.lambda;

  EigenConfig fine_cfg;
  fine_cfg.grid_nodes = 2 * (static_cast<int>(pair.grid.size()) - 1);
  RadialEigenpair fine = solve_eigenpair(pair.n, pair.s, fine_cfg);
  const double shift = std::abs(fine.lambda - pair.lambda) / pair.lambda;
  const bool grid_ok = shift < 1e-4;

  // log-log slope of phi(1 - eps) against eps
  std::vector<double> eps = {1e-2, 1e-3, 1e-4};
  std::vector<double> lx, ly;
  for (double ev : eps) {
    lx.push_back(std::log(ev));
    ly.push_back(std::log(pair.phi(1.0 - ev)));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int m = static_cast<int>(lx.size());
  for (int i = 0; i < m; ++i) sx += lx[i], sy += ly[i], sxx += lx[i] * lx[i], sxy += lx[i] * ly[i];
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const bool slope_ok = std::abs(slope - pair.s) <= 0.05;

  report(4, "eigenpair residual and decay", res_ok && grid_ok && slope_ok,
         fmt("res=%.1e shift=%.1e slope=%.3f", worst, shift, slope), seconds_since(t0));
}

// 5: boundary growth constant
void criterion_5(const RadialEigenpair& pair) {
  const auto t0 = Clock::now();
  std::vector<double> in = {-1.0};
  const auto row = boundary_law_probe(pair, 1e-3, in);
  const bool ratio_ok = std::abs(row.ratio - 1.0) <= 0.03;
  std::vector<double> out = {1.0};
  const bool outward_zero = boundary_law_probe(pair, 1e-3, out).value == 0.0;
  report(5, "boundary growth law", ratio_ok && outward_zero, fmt("ratio=%.4f", row.ratio),
         seconds_since(t0));
}

// 6: distributional boundary pairing for derivative orders 0 and 1
void criterion_6(const RadialEigenpair& pair) {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  std::vector<double> center = {-0.4};
  for (int a : {0, 1}) {
    std::vector<int> alpha = {a};
    double last = 0.0;
    for (double ev : {4e-2, 2e-2, 1e-2}) {
      auto chk = verify_distributional(pair, alpha, ev, center, 0.3, QuadratureConfig{});
      ok = ok && !chk.degenerate;
      last = chk.rel_err;
    }
    ok = ok && last <= 0.05;
    detail += fmt("a=%1.0f:%.3f ", double(a), last);
  }
  report(6, "distributional boundary pairing", ok, detail, seconds_since(t0));
}

// 7: derivative spanning at order 3 for both operator shapes
void criterion_7(const std::shared_ptr<const RadialEigenpair>& base) {
  const auto t0 = Clock::now();
  OperatorSpec d0;
  d0.nonlocal_terms = {{1.0, 0.5, 1}};
  d0.validate();
  auto dict0 = sample_dictionary(d0, {base});
  DerivativeMatrix m0 = assemble_matrix(dict0, 3);
  const double c0 = m0.singular_values.back() / m0.singular_values.front();
  const bool ok0 = dict0.size() <= 500 && m0.numerical_rank() == m0.cols();

  OperatorSpec d1 = caloric_spec(0.5, 1);
  auto dict1 = sample_dictionary(d1, {base});
  DerivativeMatrix m1 = assemble_matrix(dict1, 3);
  const double c1 = m1.singular_values.back() / m1.singular_values.front();
  const bool ok1 = dict1.size() <= 500 && m1.numerical_rank() == m1.cols();

  report(7, "derivative spanning at order 3", ok0 && ok1,
         fmt("sv-ratios %.1e (d=0), %.1e (d=1)", c0, c1), seconds_since(t0));
}

// 8: quadratic space profile approximated by an operator-annihilated field
void criterion_8(const std::vector<std::shared_ptr<const RadialEigenpair>>& bases) {
  const auto t0 = Clock::now();
  OperatorSpec cal = caloric_spec(0.5, 1);
  std::vector<Monomial> target = {{1.0, {0, 2}}};
  auto res = approximate_polynomial(cal, target, 0, 0.05, bases);
  const double wall = seconds_since(t0);
  const bool ok = res.met && res.achieved_ck_error <= 0.05 && res.lambda_residual <= 1e-3 &&
                  wall < 600.0;
  report(8, "space-time quadratic demo", ok,
         fmt("err=%.1e res=%.1e", res.achieved_ck_error, res.lambda_residual), wall);

  const auto t1 = Clock::now();
  OperatorSpec d0;
  d0.nonlocal_terms = {{1.0, 0.5, 1}};
  d0.validate();
  auto res0 = approximate_monomial(d0, {2}, 0, 0.05, bases);
  std::vector<double> xm = {-0.3}, x0 = {0.0}, xp = {0.3};
  const double second_diff = res0.value(xp) - 2.0 * res0.value(x0) + res0.value(xm);
  const bool ok0 = res0.met && second_diff > 0.0;
  report(8, "interior minimum witness (d=0)", ok0,
         fmt("second_diff=%.4f err=%.1e", second_diff, res0.achieved_ck_error),
         seconds_since(t1));
}

// 9: error decays at least linearly in the scaling parameter
void criterion_9(const std::vector<std::shared_ptr<const RadialEigenpair>>& bases) {
  const auto t0 = Clock::now();
  OperatorSpec cal = caloric_spec(0.5, 1);
  std::vector<double> etas;
  for (int j = 2; j <= 6; ++j) etas.push_back(std::pow(2.0, -j));
  auto rows = eta_error_sweep(cal, {0, 2}, 0, etas, bases);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [eta, err] : rows) {
    const double lx = std::log(eta), ly = std::log(std::max(err, 1e-300));
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  const int m = static_cast<int>(rows.size());
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  report(9, "error decay order in the scaling", slope >= 0.9, fmt("slope=%.2f", slope),
         seconds_since(t0));
}

// 10: logistic resource built from its own approximant
void criterion_10(const std::vector<std::shared_ptr<const RadialEigenpair>>& bases) {
  const auto t0 = Clock::now();
  ScalarField sigma;
  sigma.dim = 2;
  sigma.support_radius = 100.0;
  sigma.smooth_radius = 100.0;
  sigma.eval = [](std::span<const double> x) { return 1.0 + 0.25 * x[1] * x[1]; };
  LogisticReport rep = logistic_resource(sigma, 0.5, 0, 0.05, bases);
  const bool identical = rep.logistic_residual == rep.caloric_residual;  // bitwise
  const bool ok = rep.met && rep.ck_error <= 0.05 && rep.positive && rep.min_value > 0.0 &&
                  identical;
  report(10, "logistic resource demo", ok,
         fmt("err=%.1e min=%.3f", rep.ck_error, rep.min_value), seconds_since(t0));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  criterion_1();
  criterion_2();
  criterion_3();

  auto base = std::make_shared<const RadialEigenpair>(solve_eigenpair(1, 0.5));
  std::vector<std::shared_ptr<const RadialEigenpair>> bases = {base};
  criterion_4(*base);
  criterion_5(*base);
  criterion_6(*base);
  criterion_7(base);
  criterion_8(bases);
  criterion_9(bases);
  criterion_10(bases);

  std::printf("%s (total %.1fs)\n", all_ok ? "ALL CRITERIA PASSED" : "CRITERIA FAILED",
              seconds_since(t0));
  return all_ok ? 0 : 1;
}
