#ifndef FRACAP_EIGENPAIR_HPP
#define FRACAP_EIGENPAIR_HPP

#include <memory>
#include <span>
#include <vector>

#include "fracap/field.hpp"
#include "fracap/green.hpp"
#include "fracap/interp.hpp"
#include "fracap/quadrature.hpp"

namespace fracap {

/// Principal Dirichlet eigenpair of the fractional Laplacian on the unit
/// ball (n = 1 or 2): the positive radial phi with (-Delta)^s phi = lambda phi
/// in B1, phi = 0 outside, |phi|_{L2} = 1. Computed by inverting with the
/// ball kernel: phi = lambda K phi, so the principal pair is the top of the
/// compact positive operator K.
///
/// The profile is stored as phi(r) = (1 - r^2)^s w(r); w stays smooth up to
/// r = 1, which is what makes boundary quantities well-conditioned.
struct EigenConfig {
  int grid_nodes = 0;        ///< radial cells (0 = pick by dimension)
  int power_iters = 600;     ///< stage 1: power iteration on the hat matrix
  double power_tol = 1e-13;
  int nystrom_iters = 14;    ///< stage 2: fixed point on the interpolant
  double nystrom_tol = 5e-13;
  QuadratureConfig quad;
};

struct RadialEigenpair {
  int n = 1;
  double s = 0.5;
  double lambda = 0.0;       ///< principal eigenvalue
  double kappa_star = 0.0;   ///< phi(e + eps X) ~ eps^s kappa_star lambda (-e.X)_+^s
  double boundary_value = 0.0;  ///< w(1) = lim phi / (1-|x|^2)^s at the sphere
  std::vector<double> grid;  ///< radii, graded toward r = 1
  std::vector<double> w;     ///< regular part at the grid nodes
  PchipCurve w_curve;        ///< monotone-safe interpolant of w
  std::vector<double> rayleigh_history;  ///< stage-1 quotients (nondecreasing)
  long source_evals = 0;     ///< integrand evaluations spent in stage 2
  int nystrom_used = 0;

  /// Chebyshev coefficients of the smooth part of w in zeta = 2 r^2 - 1
  /// (w is even in r, so a polynomial in r^2 is the natural basis), fitted by
  /// least squares to the converged node values. w is not smooth through
  /// r = 1: it carries a weak boundary layer (powers t^sigma of t = 1 - r^2,
  /// with log factors at integer resonances), so those terms are fitted
  /// alongside and kept separate; the polynomial tail then decays fast and
  /// high-order derivatives stay trustworthy.
  struct BoundaryTerm {
    double sigma = 0.0;  ///< exponent of t = 1 - r^2
    int logpow = 0;      ///< power of log t
    double coef = 0.0;
  };
  std::vector<double> w_cheb;
  std::vector<BoundaryTerm> w_sing;
  double cheb_fit_residual = 0.0;  ///< max |fit - node value| over the grid

  double w_at(double r) const;
  double phi(double r) const;                   ///< 0 for r >= 1
  double phi_deriv(double r, int order) const;  ///< radial d^k/dr^k, r < 1, k <= 3
  double sup_value() const { return phi(0.0); }

  /// Spectral evaluators (Chebyshev fit). Same function as w_at/phi to ~1e-8,
  /// but C^inf inside the ball: derivatives through order 6 stay trustworthy.
  double w_smooth(double r) const;
  double w_smooth_deriv(double r, int order) const;  ///< k <= 6
  double phi_smooth(double r) const;                 ///< 0 for r >= 1
  double phi_smooth_deriv(double r, int order) const;  ///< r < 1, k <= 6

  /// The eigenfunction as an n-dimensional field centered at `center`
  /// (defaults to the origin), with analytic axis partials and kink radii.
  ScalarField as_field(std::span<const double> center = {}) const;
};

RadialEigenpair solve_eigenpair(int n, double s, const EigenConfig& cfg = {});

/// phi_R(x) = phi(x / R): eigenvalue lambda / R^{2s}, support radius R.
/// scale_to_eigenvalue picks R so the scaled eigenvalue hits the target.
struct ScaledEigenfunction {
  std::shared_ptr<const RadialEigenpair> base;
  double radius = 1.0;
  double lambda = 0.0;

  double value(double r) const;
  double radial_deriv(double r, int order) const;
  ScalarField as_field(std::span<const double> center = {}) const;
};
ScaledEigenfunction scale_to_eigenvalue(std::shared_ptr<const RadialEigenpair> base,
                                        double lambda_target);

/// |(-Delta)^s phi - lambda phi| at |x| = radius, evaluated through the
/// independent singular-integral route (no kernel inversion involved).
struct ResidualRow {
  double radius = 0.0, phi_value = 0.0, residual = 0.0;
};
std::vector<ResidualRow> verify_eigen_residual(const RadialEigenpair& pair,
                                               std::span<const double> radii,
                                               const QuadratureConfig& q);

/// Boundary growth law phi(e + eps X) = eps^s kappa_star lambda (-e.X)_+^s
/// (1 + O(eps)), probed at e = first axis. For e.X >= 0 the point leaves the
/// ball, so the value is exactly zero.
struct BoundaryLawRow {
  std::vector<double> X;
  double value = 0.0;      ///< phi(e + eps X)
  double predicted = 0.0;  ///< eps^s kappa_star lambda (-e.X)_+^s
  double ratio = 0.0;      ///< value / predicted (0 when predicted == 0)
};
BoundaryLawRow boundary_law_probe(const RadialEigenpair& pair, double eps,
                                  std::span<const double> X);

/// Distributional boundary limit: with phi_eps(X) = eps^{-s} phi(e + eps X),
/// for any bump psi supported in the inward half-space {e.X < 0},
///   (-1)^{|a|} int phi_eps d^a psi -> kappa_star lambda s(s-1)...(s-|a|+1)
///                                     (-e)^a int (-e.X)_+^{s-|a|} psi.
/// lhs integrates the solved eigenfunction; rhs integrates the closed form.
struct DistributionalCheck {
  std::vector<int> alpha;
  double eps = 0.0;
  double lhs = 0.0, rhs = 0.0;
  double rel_err = 0.0;    ///< |lhs-rhs| / |rhs| (absolute error when rhs == 0)
  bool degenerate = false; ///< rhs == 0 (cross-axis derivative)
};
DistributionalCheck verify_distributional(const RadialEigenpair& pair, std::span<const int> alpha,
                                          double eps, std::span<const double> psi_center,
                                          double psi_halfwidth, const QuadratureConfig& q);

}  // namespace fracap

#endif
