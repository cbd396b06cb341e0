#ifndef FRACAP_SPANNER_HPP
#define FRACAP_SPANNER_HPP

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "fracap/eigenpair.hpp"
#include "fracap/field.hpp"
#include "fracap/fracop.hpp"

namespace fracap {

/// Closed-form solution of the constant-coefficient Cauchy problem
///   a_bar d^m v / dx^m = -|a_bar| v,  v^(i)(0) = 1 for i = 0..m-1,
/// as a combination of exponentials e^{r x} over the m complex roots of
/// r^m = -a_bar. The derivative table at 0 obeys the exact recursion
/// derivs_at_zero[i + m] = -a_bar * derivs_at_zero[i], so derivatives of
/// any order are available without truncation error, and none of them
/// vanish.
struct OdeSolution {
  int m = 1;
  double a_bar = 1.0;
  std::vector<std::complex<double>> roots;
  std::vector<std::complex<double>> coefficients;
  std::vector<double> derivs_at_zero;  ///< v^(i)(0), i <= K_max

  double value(double x) const { return deriv(x, 0); }
  double deriv(double x, int order) const;
};

OdeSolution ode_solve(int m, double a_bar, int k_max);

/// Rate balancing: lambda_j = lambda_star_j for j < N and the last rate
/// picked so the element's zeroth-order budget closes,
///   lambda_N = (sum_j |a_j| t_j^{m_j} - sum_{j<N} A_j lambda_j) / A_N.
/// Rejection (lambda_N <= 0, i.e. t outside the admissible set) is a value,
/// not an error. For purely nonlocal operators (d = 0) there is nothing to
/// balance against: every rate is the base eigenvalue and the defect
/// sum_j A_j lambda_j is reported on the built element instead.
struct RateBalance {
  bool accepted = false;
  std::vector<double> lambda;
};
RateBalance balance_rates(const OperatorSpec& spec, std::span<const double> t,
                          std::span<const double> lambda_star);

/// Radial plateau cutoff: 1 on |x| <= rho/2, 0 outside |x| >= rho, and a
/// smooth monotone transition in between. All derivatives vanish identically
/// on the plateau (and at the origin in particular).
struct Cutoff {
  double rho = 1.0;
  double radial(double r, int order = 0) const;
  double value(std::span<const double> x) const;
};

/// One dictionary entry w(x, X) = tau(x) prod_j v_j(t_j x_j)
/// prod_j phi_j(X_j + c_j) with c_j = e_j + eps Y_j strictly inside the
/// support ball of the scaled eigenfunction phi_j. Within `neighborhood` of
/// the origin, L w = defect * w with defect = sum_j A_j lambda_j -
/// sum_j |a_j| t_j^{m_j} (zero when the rates balance, i.e. whenever d >= 1).
struct DictionaryElement {
  OperatorSpec spec;
  std::vector<double> t;
  std::vector<double> rates;
  double harmonic_defect = 0.0;
  std::vector<std::vector<double>> directions;  ///< e_j, |e_j| = support radius r_j
  std::vector<std::vector<double>> offsets;     ///< Y_j, e_j . Y_j < 0
  double eps = 0.0;
  Cutoff cutoff;
  std::vector<OdeSolution> ode;                 ///< one per local axis
  std::vector<ScaledEigenfunction> phis;        ///< one per nonlocal block
  std::vector<std::vector<double>> centers;     ///< c_j = e_j + eps Y_j
  double neighborhood = 0.0;

  int dim() const { return spec.total_dim(); }
  double value(std::span<const double> xX) const;
  /// d^orders w at a point, exact product rule through the factorization
  double partial(std::span<const double> xX, std::span<const int> orders) const;
  ScalarField as_field() const;
};

DictionaryElement build_element(const OperatorSpec& spec, std::span<const double> t,
                                const std::vector<std::vector<double>>& directions,
                                const std::vector<std::vector<double>>& offsets, double eps,
                                const std::vector<std::shared_ptr<const RadialEigenpair>>& bases,
                                const Cutoff& cutoff = {});

/// max over sampled points |(x,X)| <= 0.1 * neighborhood of
/// |L w - defect * w| via the singular-integral route; deterministic seed.
double element_residual(const DictionaryElement& elem, int npoints, unsigned seed,
                        const QuadratureConfig& q = {});

/// Derivative matrix at the origin: row i = (d^iota w_i(0))_iota over all
/// multi-indices |iota| <= K, ordered by (|iota|, lexicographic). Columns
/// count K' = C(nu + K, nu).
struct DerivativeMatrix {
  int K = 0;
  std::vector<std::vector<int>> index_set;
  Eigen::MatrixXd rows;                  ///< elements x K'
  std::vector<double> singular_values;   ///< of `rows`, descending

  int cols() const { return static_cast<int>(index_set.size()); }
  int numerical_rank(double rel_cutoff = 1e-8) const;
};

std::vector<std::vector<int>> multi_indices_upto(int nu, int K);
DerivativeMatrix assemble_matrix(const std::vector<DictionaryElement>& elems, int K);

/// Thrown when the dictionary does not span the requested derivative vector.
struct SpanRankError : std::runtime_error {
  double residual = 0.0;
  explicit SpanRankError(double resid)
      : std::runtime_error("span_solve: dictionary does not span the target"),
        residual(resid) {}
};

/// Minimal-norm coefficients c with c^T rows ~= target, via SVD with
/// relative cutoff 1e-10; residual above 1e-8 * |target| raises
/// SpanRankError carrying the achieved residual.
std::vector<double> span_solve(const DerivativeMatrix& mat, std::span<const double> target);

/// Sampling policy mirroring the free parameters of the construction:
/// t on a log grid, directions uniform per block sphere, inward offsets
/// Y = -rho_Y e/|e|, shift scales eps as fractions of the support radius.
struct DictionaryPolicy {
  std::vector<double> t_grid = {0.3536, 0.5, 0.7071, 1.0, 1.4142, 2.0, 2.8284};
  std::vector<double> rho_Y = {0.5, 1.0, 2.0};
  std::vector<double> eps_fracs = {0.3, 0.1, 0.03};
  double cutoff_rho = 1.0;
  int max_elements = 500;
};

std::vector<DictionaryElement> sample_dictionary(
    const OperatorSpec& spec, const std::vector<std::shared_ptr<const RadialEigenpair>>& bases,
    const DictionaryPolicy& policy = {});

}  // namespace fracap

#endif
