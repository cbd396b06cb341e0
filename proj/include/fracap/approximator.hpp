#ifndef FRACAP_APPROXIMATOR_HPP
#define FRACAP_APPROXIMATOR_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fracap/eigenpair.hpp"
#include "fracap/spanner.hpp"

namespace fracap {

/// Scaling plan for one target monomial x^i X^I / iota!. gamma is the
/// homogeneity of the monomial under the anisotropic dilation x_j ->
/// eta^{1/m_j} x_j, X_j -> eta^{1/(2 s_j)} X_j; mu the smallest exponent.
/// The spanning order K = K_o + |iota| + k with K_o the least integer
/// >= (gamma + 1)/mu guarantees the rescaled Taylor remainder decays at
/// least linearly in eta, including k extra derivatives.
struct ApproximationPlan {
  std::vector<int> iota;  ///< one entry per axis (local axes first)
  double gamma = 0.0;
  double mu = 0.0;
  int K_o = 0;
  int K = 0;
  double eta = 0.25;
};

ApproximationPlan make_plan(const OperatorSpec& spec, const std::vector<int>& iota, int k);

/// Per-axis dilation factors (eta^{1/m_j} on local axes, eta^{1/(2 s_j)} on
/// nonlocal ones).
std::vector<double> scale_factors(const OperatorSpec& spec, double eta);

/// Evaluation/measurement knobs shared by the pipeline stages.
struct ApproximatorConfig {
  /// Dictionary sampling used for the derivative-spanning stage. Defaults
  /// keep every shifted center at boundary distance >= 0.2 r so that
  /// high-order derivative rows stay within double-precision reach.
  DictionaryPolicy policy{.t_grid = {0.70, 0.85, 1.0, 1.2, 1.45, 1.75, 2.1},
                          .rho_Y = {1.0, 1.4, 2.0},
                          .eps_fracs = {0.2, 0.3, 0.34},
                          .cutoff_rho = 1.0,
                          .max_elements = 500};
  double eta_start = 0.25;
  double eta_min = 1e-8;
  double box_half_width = 0.7;  ///< target box [-L, L]^nu for error reporting
  int grid_per_axis = 17;
  int residual_samples = 8;
  double fd_step = 1e-4;  ///< finite differences for reference targets
  int max_fit_degree = 10;
  int max_monomials = 50;
  unsigned seed = 12345;
  QuadratureConfig quad;
};

/// One scaled spanning stage: coef * eta^{-gamma} * sum_e c_e w_e(S_eta x).
struct ApproximationStage {
  ApproximationPlan plan;
  double coef = 1.0;
  std::vector<double> coefficients;  ///< one per dictionary element
};

struct Monomial {
  double coef = 0.0;
  std::vector<int> iota;
};

/// A compactly supported approximant assembled from dictionary elements,
/// together with the measured quality report. `met` records whether the
/// eta search reached the requested tolerance before eta underflowed; the
/// reported numbers always describe the returned field either way.
struct ApproximationResult {
  OperatorSpec spec;
  DictionaryPolicy policy;  ///< sampling knobs the dictionary was built from
  ApproximationPlan plan;   ///< stage of highest spanning order
  std::vector<ApproximationStage> stages;
  std::shared_ptr<const std::vector<DictionaryElement>> dictionary;
  double achieved_ck_error = 0.0;
  double lambda_residual = 0.0;
  double region_radius = 0.0;  ///< ball around 0 where the field is annihilated
  double support_radius = 0.0;
  int k = 0;
  bool met = false;

  int dim() const { return spec.total_dim(); }
  double value(std::span<const double> x) const;
  double partial(std::span<const double> x, std::span<const int> orders) const;
  ScalarField as_field() const;
};

/// Budget exhausted while fitting the polynomial surrogate; carries the best
/// sup-norm fit error reached.
struct FitBudgetError : std::runtime_error {
  double best_error = 0.0;
  explicit FitBudgetError(double best)
      : std::runtime_error("approximate_function: polynomial fit budget exceeded"),
        best_error(best) {}
};

/// Approximates f = x^iota / iota! by an operator-annihilated field: spans
/// the one-hot derivative target at order K, then shrinks eta geometrically
/// until the measured C^k grid error is <= eps (or eta underflows; then the
/// best eta is kept and met = false). Spanning failures propagate as
/// SpanRankError.
ApproximationResult approximate_monomial(
    const OperatorSpec& spec, const std::vector<int>& iota, int k, double eps,
    const std::vector<std::shared_ptr<const RadialEigenpair>>& bases,
    const ApproximatorConfig& cfg = {});

/// Superposes per-monomial stages; each monomial gets budget
/// eps / (J max(1, max|coef|)) so the combined measured error lands under
/// eps. The zero polynomial yields the zero field.
ApproximationResult approximate_polynomial(
    const OperatorSpec& spec, std::span<const Monomial> monomials, int k, double eps,
    const std::vector<std::shared_ptr<const RadialEigenpair>>& bases,
    const ApproximatorConfig& cfg = {});

/// Fits a polynomial surrogate (degree raised until the C^k grid error is
/// <= eps/2, else FitBudgetError), then approximates it with budget eps/2.
/// The reported error is measured against the original f.
ApproximationResult approximate_function(
    const OperatorSpec& spec, const ScalarField& f, int k, double eps,
    const std::vector<std::shared_ptr<const RadialEigenpair>>& bases,
    const ApproximatorConfig& cfg = {});

/// d/dt + (-Delta_x)^s over (t, x1..xn): local time axis first.
OperatorSpec caloric_spec(double s, int n_space);

/// Approximate f(t, x) by an s-caloric field on the box. f's axes follow the
/// internal layout (t first).
ApproximationResult approximate_caloric(
    const ScalarField& f, double s, int k, double eps,
    const std::vector<std::shared_ptr<const RadialEigenpair>>& bases,
    const ApproximatorConfig& cfg = {});

/// Logistic-resource build: u_eps caloric-approximates sigma and the
/// resource is defined as sigma_eps := u_eps, so the reaction term
/// (sigma_eps - u_eps) u_eps vanishes identically and the equation residual
/// coincides bitwise with the caloric residual. Positivity of u_eps on the
/// box is measured, not assumed.
struct LogisticReport {
  ApproximationResult u_eps;  ///< doubles as sigma_eps
  double caloric_residual = 0.0;
  double logistic_residual = 0.0;
  double ck_error = 0.0;
  double min_value = 0.0;  ///< min of u_eps over the box grid
  bool positive = false;
  bool met = false;
};

LogisticReport logistic_resource(const ScalarField& sigma, double s, int k, double eps,
                                 const std::vector<std::shared_ptr<const RadialEigenpair>>& bases,
                                 const ApproximatorConfig& cfg = {});

/// Measured C^k grid error of the monomial pipeline at each requested eta
/// (shared spanning solve); rows (eta, error) in the given eta order.
std::vector<std::pair<double, double>> eta_error_sweep(
    const OperatorSpec& spec, const std::vector<int>& iota, int k,
    std::span<const double> etas,
    const std::vector<std::shared_ptr<const RadialEigenpair>>& bases,
    const ApproximatorConfig& cfg = {});

/// Max over the tensor grid on [-L, L]^nu of |d^beta (u - f)| over all
/// |beta| <= k; u differentiated analytically, f by central differences.
double ck_grid_error(const ApproximationResult& u, const ScalarField& f, int k, double L,
                     int pts_per_axis, double fd_step);

/// Max |(L u)(y) - 0| over `npts` quadrature-measured sample points in the
/// ball of the given radius (deterministic seed).
double sample_lambda_residual(const ApproximationResult& u, double radius, int npts,
                              unsigned seed, const QuadratureConfig& q);

/// Self-describing serialization (parameters, stages, coefficients, report).
/// Loading rebuilds the dictionary deterministically from the recorded
/// policy and eigenpair parameters and verifies the recorded eigenvalues.
std::string result_to_json(const ApproximationResult& r);
ApproximationResult result_from_json(const std::string& text, const EigenConfig& ec = {});

}  // namespace fracap

#endif
