#ifndef FRACAP_FIELD_HPP
#define FRACAP_FIELD_HPP

#include <functional>
#include <span>
#include <vector>

namespace fracap {

/// A scalar field over R^dim with just enough metadata for singular
/// quadrature: compact support inside |x| <= support_radius, designated C^2
/// ball of radius smooth_radius around smooth_center, and (optionally) the
/// radii along a ray at which the field loses smoothness, so integrators can
/// split panels there.
struct ScalarField {
  int dim = 1;
  std::function<double(std::span<const double>)> eval;
  double support_radius = 1.0;
  double smooth_radius = 1.0;
  std::vector<double> smooth_center;  // empty = origin

  /// Positive radii t (sorted not required) where u(base + t*step) has reduced
  /// smoothness; `step` is a unit vector embedded in the full space. When
  /// absent, integrators fall back to support-sphere crossings.
  std::function<std::vector<double>(std::span<const double> base, std::span<const double> step)>
      ray_kinks;

  /// Optional analytic axis derivative d^order/dx_axis^order; integrators and
  /// derivative checks use finite differences when absent.
  std::function<double(std::span<const double>, int axis, int order)> analytic_partial;

  double operator()(std::span<const double> x) const { return eval(x); }
  double dist_to_smooth_edge(std::span<const double> x) const;
};

/// |x| <= support crossings of the ray base + t*step (unit step), i.e. the
/// default kink radii for a field supported on a centered ball.
std::vector<double> sphere_crossings(std::span<const double> base, std::span<const double> step,
                                     double radius);

/// Smooth transition: 0 for t <= 0, 1 for t >= 1, e^{-1/t}-based in between.
/// Derivatives up to order 3 are analytic (verified against finite
/// differences in the test suite).
double smoothstep_c(double t, int order = 0);

/// The standard compactly supported bump b(y) = exp(1 - 1/(1 - y^2)) for
/// |y| < 1 (so b(0) = 1), 0 outside; derivatives up to order 3.
double bump_c(double y, int order = 0);

/// Product bump on R^dim: amplitude * prod_i b((x_i - c_i)/halfwidth).
/// Supplies analytic partials; support radius of the enclosing ball is set.
ScalarField make_bump_field(int dim, std::vector<double> center, double halfwidth,
                            double amplitude = 1.0);

/// (1 - |x|^2)^s_+ on R^n. smooth_radius defaults just inside the unit ball.
ScalarField make_ms_profile(int n, double s, double smooth_radius = 0.999);

/// Field from a radial profile P(r) supported on |x| <= radius: x -> P(|x|).
ScalarField make_radial_field(int n, std::function<double(double)> profile, double radius,
                              double smooth_radius);

/// Mixed partial d^{orders} of the radial composite P(|y|), where P supplies
/// radial derivatives up to |orders| as P(r, k). The chain-rule expansion is
/// generated exactly by rewriting terms c * prod_i y_i^{p_i} * r^{-q} *
/// P^{(d)}(r), so any order and dimension work uniformly. Requires |y| away
/// from 0 (the rewriting divides by r); callers keep base points off-center.
double radial_mixed_partial(const std::function<double(double, int)>& P,
                            std::span<const double> y, std::span<const int> orders);

/// 1-D smooth compactly supported test function (a bump of the above shape)
/// centered at c with halfwidth w, with derivatives up to order 3.
struct TestFunction {
  double center = 0.0, halfwidth = 1.0, amplitude = 1.0;
  double operator()(double x) const { return deriv(x, 0); }
  double deriv(double x, int order) const;
  double support_lo() const { return center - halfwidth; }
  double support_hi() const { return center + halfwidth; }
};

}  // namespace fracap

#endif
