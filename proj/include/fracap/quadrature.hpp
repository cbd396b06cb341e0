#ifndef FRACAP_QUADRATURE_HPP
#define FRACAP_QUADRATURE_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fracap {

/// Tuning knobs for the singular-integral machinery. All integrals in the
/// library run through panel-wise Gauss-Legendre with geometric grading
/// toward known breakpoints (support crossings, kernel singularities).
struct QuadratureConfig {
  int radial_nodes = 16;        ///< Gauss-Legendre nodes per panel
  int angular_nodes = 96;       ///< trapezoid nodes on the half circle (2-D)
  double truncation_radius = 64.0;  ///< hard cap for radial integration extent
  double delta_cap = 1e-2;      ///< cap for the inner/outer split radius
  int grading_levels = 26;      ///< geometric levels toward each breakpoint
  double grading_min_frac = 1e-11;  ///< deepest panel width relative to base
  long max_evals = 80'000'000;  ///< integrand-evaluation budget per call
  int series_terms = 60;        ///< truncation for near-boundary kernel series
  /// substitution removing the t^{s-1} endpoint singularity of the kernel
  /// integral: t = u^{1/s} (default) or t = u^2
  enum class EndpointMap { pow_inv_s, squared } endpoint_map = EndpointMap::pow_inv_s;
};

/// Nodes/weights of the n-point Gauss-Legendre rule on [-1, 1]; cached.
const std::vector<double>& gl_nodes(int n);
const std::vector<double>& gl_weights(int n);

/// Running evaluation counter so callers can report quadrature statistics and
/// enforce budgets without threading a context object through every lambda.
struct EvalBudget {
  long used = 0;
  long cap = 0;  // 0 = unlimited
  bool exceeded = false;
  void charge(long n) {
    used += n;
    if (cap > 0 && used > cap) exceeded = true;
  }
};

template <class F>
double integrate_gl(F&& f, double a, double b, int n) {
  const auto& xs = gl_nodes(n);
  const auto& ws = gl_weights(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += ws[i] * f(mid + half * xs[i]);
  return acc * half;
}

/// Subdivide [a, b] so that panel widths shrink geometrically toward each
/// breakpoint (and, optionally, toward the interval ends). Breakpoints are
/// radii of reduced smoothness; the deepest panel still gets integrated, so
/// integrable endpoint singularities come out with ~min_frac^{power} error.
std::vector<double> graded_mesh(double a, double b, std::span<const double> interior_breaks,
                                bool grade_left, bool grade_right, int levels, double min_frac);

template <class F>
double integrate_graded(F&& f, double a, double b, std::span<const double> interior_breaks,
                        const QuadratureConfig& q, EvalBudget* budget = nullptr,
                        bool grade_left = true, bool grade_right = true) {
  if (!(b > a)) return 0.0;
  std::vector<double> mesh =
      graded_mesh(a, b, interior_breaks, grade_left, grade_right, q.grading_levels, q.grading_min_frac);
  double acc = 0.0;
  for (size_t i = 0; i + 1 < mesh.size(); ++i) {
    acc += integrate_gl(f, mesh[i], mesh[i + 1], q.radial_nodes);
    if (budget) {
      budget->charge(q.radial_nodes);
      if (budget->exceeded) break;
    }
  }
  return acc;
}

}  // namespace fracap

#endif
