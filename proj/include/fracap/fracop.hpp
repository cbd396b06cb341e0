#ifndef FRACAP_FRACOP_HPP
#define FRACAP_FRACOP_HPP

#include <cmath>
#include <span>
#include <vector>

#include "fracap/field.hpp"
#include "fracap/quadrature.hpp"

namespace fracap {

/// Mixed local/nonlocal operator
///   L u = sum_j a_j d^{m_j}/dx_j^{m_j} u + sum_j A_j (-Delta_{X_j})^{s_j} u
/// acting on coordinates laid out as (x_1..x_d | X_1 | ... | X_N) with
/// dim X_j = n_j. Local axes carry pure one-dimensional derivatives.
struct OperatorSpec {
  struct LocalTerm {
    double a = 0.0;
    int m = 1;
  };
  struct NonlocalTerm {
    double A = 1.0;
    double s = 0.5;
    int n = 1;
  };
  std::vector<LocalTerm> local_terms;
  std::vector<NonlocalTerm> nonlocal_terms;

  int local_dim() const { return static_cast<int>(local_terms.size()); }
  int total_dim() const;
  int block_offset(int j) const;  ///< first coordinate index of block j
  void validate() const;          ///< throws std::invalid_argument on misuse
};

struct FracResult {
  double value = 0.0;
  bool budget_exceeded = false;
  long evals = 0;
};

/// (-Delta)^s u at x via the symmetrized principal-value integral, split at
/// delta = min(delta_cap, distance to the field's smooth edge)/2. The far
/// tail beyond the support is integrated in closed form.
/// Preconditions: x strictly inside the smooth ball; s in (0,1); dim(u) = |x|.
FracResult frac_laplacian_at(const ScalarField& u, std::span<const double> x, double s,
                             const QuadratureConfig& q = {});

/// Same, but differencing only the coordinates [block_begin, block_begin+bn):
/// the partial fractional Laplacian in one variable block, other coordinates
/// frozen. bn in {1, 2}.
FracResult frac_laplacian_block_at(const ScalarField& u, std::span<const double> x,
                                   int block_begin, int bn, double s,
                                   const QuadratureConfig& q = {});

/// L u(x): local derivatives by centered finite differences of order >= 4
/// (step 1e-3 * smooth_radius) unless the field exposes analytic partials;
/// nonlocal terms by the quadrature above.
FracResult lambda_residual_at(const OperatorSpec& op, const ScalarField& u,
                              std::span<const double> x, const QuadratureConfig& q = {});

/// Fornberg weights for the order-m derivative on the stencil {-p..p}*h,
/// accuracy >= 4. Exposed for reuse and direct testing.
std::vector<double> central_fd_weights(int m, int p);
int central_fd_halfwidth(int m);

/// Order-m accuracy-(>=4) centered finite difference of a 1-D callable.
template <class F>
double central_fd(F&& f, double x0, int m, double h) {
  const int p = central_fd_halfwidth(m);
  const std::vector<double> w = central_fd_weights(m, p);
  double acc = 0.0;
  for (int i = -p; i <= p; ++i) acc += w[i + p] * f(x0 + i * h);
  return acc / std::pow(h, m);
}

}  // namespace fracap

#endif
