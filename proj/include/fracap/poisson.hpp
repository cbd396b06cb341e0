#ifndef FRACAP_POISSON_HPP
#define FRACAP_POISSON_HPP

#include <span>
#include <vector>

#include "fracap/field.hpp"
#include "fracap/green.hpp"

namespace fracap {

/// Dirichlet problem for the fractional Laplacian on the unit ball:
///   (-Delta)^s u = f in B1,  u = 0 on R^n \ B1,
/// solved by kernel superposition u(x) = kappa(n, s) int_{B1} f(z) G(x, z) dz.
struct DirichletSolver {
  GreenKernel kernel;

  DirichletSolver() = default;
  DirichletSolver(int n, double s) { kernel.n = n, kernel.s = s; }
  DirichletSolver(int n, double s, const QuadratureConfig& q) {
    kernel.n = n, kernel.s = s, kernel.quad = q;
  }
};

struct SolveInfo {
  long source_evals = 0;  ///< number of f evaluations spent on the integral
};

/// Pointwise solution value u(x), |x| < 1.
double dirichlet_value(const DirichletSolver& ds, const ScalarField& f, std::span<const double> x,
                       SolveInfo* info = nullptr);

/// Boundary growth coefficient: lim_{eps->0+} eps^{-s} u(e + eps w) for |e|=1
/// and inward w, equal to kappa(n, s) times the boundary pairing of f.
double dirichlet_boundary_limit(const DirichletSolver& ds, const ScalarField& f,
                                std::span<const double> e, std::span<const double> omega);

/// c(n, s) = 4^s Gamma(n/2 + s) Gamma(1 + s) / Gamma(n/2): the constant value
/// of the fractional Laplacian of (1 - |x|^2)^s_+ inside the unit ball, so the
/// Dirichlet solution for the constant source c(n, s) is exactly that profile.
double profile_source_constant(int n, double s);

/// Solve with the constant source c(n, s) and compare against the closed-form
/// profile at the given interior radii (probe direction: first axis).
struct RoundTripRow {
  double radius = 0.0, numeric = 0.0, exact = 0.0, abs_err = 0.0;
};
std::vector<RoundTripRow> verify_round_trip(const DirichletSolver& ds,
                                            std::span<const double> radii);

}  // namespace fracap

#endif
