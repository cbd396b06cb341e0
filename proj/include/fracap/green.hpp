#ifndef FRACAP_GREEN_HPP
#define FRACAP_GREEN_HPP

#include <span>
#include <vector>

#include "fracap/field.hpp"
#include "fracap/quadrature.hpp"

namespace fracap {

/// Dirichlet Green kernel of the unit ball for the fractional Laplacian,
///   G(x, z) = |z-x|^{2s-n} * int_0^{r0} t^{s-1} (1+t)^{-n/2} dt,
///   r0(x, z) = (1-|x|^2)(1-|z|^2) / |z-x|^2.
/// The t-integral is summed as a binomial series when r0 <= 1/2 and
/// quadratured (endpoint substitution configurable) otherwise.
struct GreenKernel {
  int n = 1;
  double s = 0.5;
  QuadratureConfig quad;
};

double r0(std::span<const double> x, std::span<const double> z);

double green_value(const GreenKernel& k, std::span<const double> x, std::span<const double> z);

/// Near-boundary decomposition G = g0 + g1 + tail with r1 = min(r0, 1/2):
/// g0 the leading |z-x|^{2s-n} r1^s / s term, g1 the k >= 1 series part, and
/// tail the quadrature remainder over [r1, r0] (zero when r0 <= 1/2).
struct SeriesSplit {
  double g0 = 0.0, g1 = 0.0, tail = 0.0;
  double total() const { return g0 + g1 + tail; }
};
SeriesSplit green_series_split(const GreenKernel& k, std::span<const double> x,
                               std::span<const double> z);

/// Series coefficient c_k = binom(-n/2, k) / (k + s) of the r1^{k+s} terms.
double green_series_coefficient(int n, double s, int k);

/// int_0^{r0} t^{s-1} (1+t)^{-n/2} dt via the hybrid series/quadrature route
/// used by green_value.
double green_radial_integral(int n, double s, double r0v, const QuadratureConfig& q);

/// The same integral by pure quadrature with the configured endpoint
/// substitution (t = u^{1/s} or t = u^2); kept as an independent reference
/// for cross-checking the series branch.
double green_quadrature_reference(int n, double s, double r0v, const QuadratureConfig& q);

/// The boundary pairing
///   B(f; e, w) = int_{B1} f(z) (-2 e.w)^s (1-|z|^2)^s / (s |z-e|^n) dz,
/// for |e| = 1 and an inward direction w (e.w < 0). This is the limit of
/// eps^{-s} int f(z) G(e + eps w, z) dz as eps -> 0+.
double boundary_functional(const GreenKernel& k, const ScalarField& f, std::span<const double> e,
                           std::span<const double> omega);

/// Kernel-weighted source integral int_{B1} f(z) G(x, z) dz (no kappa factor).
double green_pairing(const GreenKernel& k, const ScalarField& f, std::span<const double> x);

struct GoaRow {
  double eps = 0.0, lhs = 0.0, rhs = 0.0, ratio = 0.0;
};
struct GoaTable {
  std::vector<GoaRow> rows;
  double rhs = 0.0;
  bool degenerate = false;  ///< set when rhs vanishes (e.g. zero datum)
};

/// For each eps: lhs = eps^{-s} int f G(e + eps w, .) vs rhs = the boundary
/// functional. Ratios converge to 1 as eps -> 0 for admissible data.
GoaTable verify_goa_limit(const GreenKernel& k, const ScalarField& f, std::span<const double> e,
                          std::span<const double> omega, std::span<const double> eps_values);

}  // namespace fracap

#endif
