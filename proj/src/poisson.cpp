#include "fracap/poisson.hpp"

#include <cmath>
#include <stdexcept>

#include "fracap/constants.hpp"

namespace fracap {

namespace {

ScalarField counted(const ScalarField& f, long* counter) {
  ScalarField g = f;
  auto inner = f.eval;
  g.eval = [inner, counter](std::span<const double> x) {
    ++*counter;
    return inner(x);
  };
  return g;
}

}  // namespace

double dirichlet_value(const DirichletSolver& ds, const ScalarField& f, std::span<const double> x,
                       SolveInfo* info) {
  const double kappa = green_constant(ds.kernel.n, ds.kernel.s);
  if (!info) return kappa * green_pairing(ds.kernel, f, x);
  ScalarField g = counted(f, &info->source_evals);
  return kappa * green_pairing(ds.kernel, g, x);
}

double dirichlet_boundary_limit(const DirichletSolver& ds, const ScalarField& f,
                                std::span<const double> e, std::span<const double> omega) {
  return green_constant(ds.kernel.n, ds.kernel.s) * boundary_functional(ds.kernel, f, e, omega);
}

double profile_source_constant(int n, double s) {
  if (n < 1 || !(s > 0.0 && s < 1.0))
    throw std::invalid_argument("profile source constant: need n >= 1, s in (0,1)");
  return std::pow(4.0, s) * gamma_fn(0.5 * n + s) * gamma_fn(1.0 + s) / gamma_fn(0.5 * n);
}

std::vector<RoundTripRow> verify_round_trip(const DirichletSolver& ds,
                                            std::span<const double> radii) {
  const int n = ds.kernel.n;
  const double s = ds.kernel.s;
  const double c = profile_source_constant(n, s);
  ScalarField source;
  source.dim = n;
  source.support_radius = 1.0;
  source.smooth_radius = 0.999;
  source.eval = [c, n](std::span<const double> z) {
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += z[i] * z[i];
    return r2 < 1.0 ? c : 0.0;
  };

  std::vector<RoundTripRow> out;
  std::vector<double> x(n, 0.0);
  for (double r : radii) {
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("round trip: radius outside [0,1)");
    x.assign(n, 0.0);
    x[0] = r;
    RoundTripRow row;
    row.radius = r;
    row.numeric = dirichlet_value(ds, source, x);
    row.exact = std::pow(1.0 - r * r, s);
    row.abs_err = std::abs(row.numeric - row.exact);
    out.push_back(row);
  }
  return out;
}

}  // namespace fracap
