#include "fracap/eigenpair.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "fracap/constants.hpp"
#include "fracap/fracop.hpp"

namespace fracap {

namespace {

// radii graded quadratically toward the sphere: 1 - r_j = (1 - j/M)^2
std::vector<double> make_grid(int M) {
  std::vector<double> r(M + 1);
  for (int j = 0; j <= M; ++j) {
    const double t = 1.0 - static_cast<double>(j) / M;
    r[j] = 1.0 - t * t;
  }
  r[0] = 0.0;
  r[M] = 1.0;
  return r;
}

// 2 int_0^pi G(r e1, rho(cos a, sin a)) da; near-diagonal rows need deep
// grading toward a = 0 where the kernel peaks
double ring_kernel(const GreenKernel& gk, double r, double rho, int levels) {
  QuadratureConfig qa = gk.quad;
  qa.radial_nodes = 12;
  qa.grading_levels = levels;
  const double x[2] = {r, 0.0};
  return 2.0 * integrate_graded(
                   [&](double a) {
                     const double z[2] = {rho * std::cos(a), rho * std::sin(a)};
                     return green_value(gk, std::span<const double>(x, 2),
                                        std::span<const double>(z, 2));
                   },
                   0.0, M_PI, {}, qa, nullptr, true, false);
}

// product-integration hat matrix: K(i, j) = kappa int_{B} G(r_i e1, z)
// (1-|z|^2)^s h_j(|z|) dz, interior rows i = 0..M-1, columns j = 0..M
Eigen::MatrixXd assemble_hat_matrix(const GreenKernel& gk, const std::vector<double>& grid) {
  const int M = static_cast<int>(grid.size()) - 1;
  const int n = gk.n;
  const double s = gk.s;
  const double kap = green_constant(n, s);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(M, M + 1);

  for (int i = 0; i < M; ++i) {
    const double ri = grid[i];
    const double xi[1] = {ri};
    for (int k = 0; k < M; ++k) {
      const double a = grid[k], b = grid[k + 1];
      const bool sing_left = (k == i) || k == 0;  // k == 0 guards the rho ~ 0 kernel mass
      const bool sing_right = (k + 1 == i) || (k + 1 == M);
      std::vector<double> mesh;
      if (sing_left || sing_right)
        mesh = graded_mesh(a, b, {}, sing_left, sing_right, gk.quad.grading_levels,
                           gk.quad.grading_min_frac);
      else
        mesh = {a, b};
      const auto& xs = gl_nodes(gk.quad.radial_nodes);
      const auto& ws = gl_weights(gk.quad.radial_nodes);
      double acc_dn = 0.0, acc_up = 0.0;
      for (size_t p = 0; p + 1 < mesh.size(); ++p) {
        const double mid = 0.5 * (mesh[p] + mesh[p + 1]), half = 0.5 * (mesh[p + 1] - mesh[p]);
        for (int q = 0; q < gk.quad.radial_nodes; ++q) {
          const double rho = mid + half * xs[q];
          const double wt = ws[q] * half;
          double gval;
          if (n == 1) {
            const double zp[1] = {rho}, zm[1] = {-rho};
            gval = green_value(gk, std::span<const double>(xi, 1), std::span<const double>(zp, 1)) +
                   green_value(gk, std::span<const double>(xi, 1), std::span<const double>(zm, 1));
          } else {
            const int levels = (k >= i - 1 && k <= i) ? 26 : 8;
            gval = rho * ring_kernel(gk, ri, rho, levels);
          }
          const double base = wt * kap * gval * std::pow(1.0 - rho * rho, s);
          const double up = (rho - a) / (b - a);
          acc_dn += base * (1.0 - up);
          acc_up += base * up;
        }
      }
      K(i, k) += acc_dn;
      K(i, k + 1) += acc_up;
    }
  }
  return K;
}

// ball mass of the hat h_j(|z|) (volume weight included)
std::vector<double> hat_masses(int n, const std::vector<double>& grid) {
  const int M = static_cast<int>(grid.size()) - 1;
  const double volf = n == 1 ? 2.0 : 2.0 * M_PI;
  std::vector<double> m(M + 1, 0.0);
  for (int j = 0; j <= M; ++j) {
    double acc = 0.0;
    if (j > 0) {
      const double a = grid[j - 1], b = grid[j];
      acc += integrate_gl([&](double r) { return (r - a) / (b - a) * std::pow(r, n - 1); }, a, b, 4);
    }
    if (j < M) {
      const double a = grid[j], b = grid[j + 1];
      acc += integrate_gl([&](double r) { return (b - r) / (b - a) * std::pow(r, n - 1); }, a, b, 4);
    }
    m[j] = volf * acc;
  }
  return m;
}

double profile_radial_integral(const std::function<double(double)>& g, int n,
                               const std::vector<double>& grid, const QuadratureConfig& q) {
  const int M = static_cast<int>(grid.size()) - 1;
  const double volf = n == 1 ? 2.0 : 2.0 * M_PI;
  auto f = [&](double r) { return g(r) * std::pow(r, n - 1); };
  double acc = 0.0;
  for (int k = 0; k + 1 < M; ++k) acc += integrate_gl(f, grid[k], grid[k + 1], 16);
  QuadratureConfig ql = q;
  ql.grading_levels = 22;
  acc += integrate_graded(f, grid[M - 1], 1.0, {}, ql, nullptr, false, true);
  return volf * acc;
}

ScalarField profile_field_fn(int n, double s, std::function<double(double)> wfn, long* counter) {
  ScalarField f;
  f.dim = n;
  f.support_radius = 1.0;
  f.smooth_radius = 0.9995;
  f.eval = [n, s, wfn = std::move(wfn), counter](std::span<const double> x) {
    if (counter) ++*counter;
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += x[i] * x[i];
    if (r2 >= 1.0) return 0.0;
    return std::pow(1.0 - r2, s) * wfn(std::sqrt(r2));
  };
  return f;
}

ScalarField profile_field(int n, double s, const PchipCurve& wc, long* counter) {
  return profile_field_fn(n, s, [wc](double r) { return wc(r); }, counter);
}

// d^k/dr^k of (1 - r^2)^s, any order: each derivative maps a term
// c r^p (1-r^2)^{s-q} to p-down and q-up terms, so the whole derivative is a
// short exact term list
double weight_deriv(double s, double r, int order) {
  struct Term {
    double c;
    int p, q;
  };
  std::vector<Term> terms{{1.0, 0, 0}};
  for (int k = 0; k < order; ++k) {
    std::vector<Term> next;
    next.reserve(terms.size() * 2);
    for (const Term& t : terms) {
      if (t.p > 0) next.push_back({t.c * t.p, t.p - 1, t.q});
      next.push_back({-2.0 * t.c * (s - t.q), t.p + 1, t.q + 1});
    }
    terms = std::move(next);
  }
  const double u = 1.0 - r * r;
  double out = 0.0;
  for (const Term& t : terms) out += t.c * std::pow(r, t.p) * std::pow(u, s - t.q);
  return out;
}

// derivatives of (1 - r^2)^s up to order 3 (hot path for the cubic route)
void profile_weight_derivs(double s, double r, double A[4]) {
  const double u = 1.0 - r * r;
  A[0] = std::pow(u, s);
  A[1] = -2.0 * s * r * std::pow(u, s - 1.0);
  A[2] = -2.0 * s * std::pow(u, s - 1.0) + 4.0 * s * (s - 1.0) * r * r * std::pow(u, s - 2.0);
  A[3] = 12.0 * s * (s - 1.0) * r * std::pow(u, s - 2.0) -
         8.0 * s * (s - 1.0) * (s - 2.0) * r * r * r * std::pow(u, s - 3.0);
}

double binom_small(int m, int j) {
  double out = 1.0;
  for (int i = 0; i < j; ++i) out = out * (m - i) / (i + 1);
  return out;
}

// Clenshaw for sum a_k T_k(z)
double cheb_eval(std::span<const double> a, double z) {
  double b1 = 0.0, b2 = 0.0;
  for (size_t k = a.size(); k-- > 1;) {
    const double b0 = 2.0 * z * b1 - b2 + a[k];
    b2 = b1;
    b1 = b0;
  }
  return a.empty() ? 0.0 : z * b1 - b2 + a[0];
}

// coefficients of d/dz of a Chebyshev series
std::vector<double> cheb_diff(const std::vector<double>& a) {
  const int N = static_cast<int>(a.size()) - 1;
  if (N <= 0) return {0.0};
  std::vector<double> b(N, 0.0);
  double next2 = 0.0, next1 = 0.0;  // b_{k+2}, b_{k+1} staging
  for (int k = N - 1; k >= 0; --k) {
    b[k] = next2 + 2.0 * (k + 1) * a[k + 1];
    next2 = next1;
    next1 = b[k];
  }
  b[0] *= 0.5;
  return b;
}

// d^order/dr^order of C(2 r^2 - 1): write the chain-rule expansion as terms
// c r^p C^(d)(z) and push each derivative through the term list
double cheb_radial_deriv(const std::vector<double>& a, double r, int order) {
  std::vector<std::vector<double>> da;
  da.push_back(a);
  for (int d = 1; d <= order; ++d) da.push_back(cheb_diff(da.back()));
  struct Term {
    double c;
    int p, d;
  };
  std::vector<Term> terms{{1.0, 0, 0}};
  for (int k = 0; k < order; ++k) {
    std::vector<Term> next;
    next.reserve(terms.size() * 2);
    for (const Term& t : terms) {
      if (t.p > 0) next.push_back({t.c * t.p, t.p - 1, t.d});
      next.push_back({4.0 * t.c, t.p + 1, t.d + 1});
    }
    terms = std::move(next);
  }
  const double z = 2.0 * r * r - 1.0;
  double out = 0.0;
  for (const Term& t : terms) out += t.c * std::pow(r, t.p) * cheb_eval(da[t.d], z);
  return out;
}

using BoundaryTerm = RadialEigenpair::BoundaryTerm;

double boundary_term_value(const BoundaryTerm& bt, double t) {
  if (t <= 0.0) return 0.0;  // sigma > 0 always, so the limit is 0
  double out = bt.coef * std::pow(t, bt.sigma);
  for (int l = 0; l < bt.logpow; ++l) out *= std::log(t);
  return out;
}

// d^order/dr^order of coef t^sigma log^L t with t = 1 - r^2, by the same
// term-rewriting trick as weight_deriv (log factors shed one power per hit)
double boundary_term_deriv(const BoundaryTerm& bt, double r, int order) {
  struct Term {
    double c;
    int p;
    double sig;
    int L;
  };
  std::vector<Term> terms{{bt.coef, 0, bt.sigma, bt.logpow}};
  for (int k = 0; k < order; ++k) {
    std::vector<Term> next;
    next.reserve(terms.size() * 3);
    for (const Term& t : terms) {
      if (t.p > 0) next.push_back({t.c * t.p, t.p - 1, t.sig, t.L});
      next.push_back({-2.0 * t.c * t.sig, t.p + 1, t.sig - 1.0, t.L});
      if (t.L > 0) next.push_back({-2.0 * t.c * t.L, t.p + 1, t.sig - 1.0, t.L - 1});
    }
    terms = std::move(next);
  }
  const double t = 1.0 - r * r;
  const double lg = std::log(t);
  double out = 0.0;
  for (const Term& tm : terms) {
    double v = tm.c * std::pow(r, tm.p) * std::pow(t, tm.sig);
    for (int l = 0; l < tm.L; ++l) v *= lg;
    out += v;
  }
  return out;
}

// boundary-layer exponents of w near r = 1: powers 2s, 4s, 6s and 1 + 2s of
// t = 1 - r^2, with a log t partner when the exponent collides with the
// integers already spanned by the polynomial block
std::vector<BoundaryTerm> boundary_layer_terms(double s) {
  std::vector<BoundaryTerm> out;
  auto push = [&out](double sigma) {
    BoundaryTerm bt;
    const double rounded = std::round(sigma);
    if (std::abs(sigma - rounded) < 1e-9) {
      bt.sigma = rounded;
      bt.logpow = 1;
    } else {
      bt.sigma = sigma;
    }
    for (const BoundaryTerm& seen : out)
      if (std::abs(seen.sigma - bt.sigma) < 1e-9 && seen.logpow == bt.logpow) return;
    out.push_back(bt);
  };
  push(2.0 * s);
  push(4.0 * s);
  push(6.0 * s);
  push(1.0 + 2.0 * s);
  return out;
}

// least-squares fit of the node values: Chebyshev block in z = 2 r^2 - 1
// plus the boundary-layer columns; singular coefficients land in `sing`
std::vector<double> cheb_fit(const std::vector<double>& grid, const std::vector<double>& w,
                             int degree, std::vector<BoundaryTerm>* sing = nullptr) {
  const int rows = static_cast<int>(grid.size());
  const int nsing = sing ? static_cast<int>(sing->size()) : 0;
  const int cols = degree + 1 + nsing;
  Eigen::MatrixXd T(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const double z = 2.0 * grid[i] * grid[i] - 1.0;
    T(i, 0) = 1.0;
    if (degree >= 1) T(i, 1) = z;
    for (int k = 2; k <= degree; ++k) T(i, k) = 2.0 * z * T(i, k - 1) - T(i, k - 2);
    for (int j = 0; j < nsing; ++j) {
      BoundaryTerm unit = (*sing)[j];
      unit.coef = 1.0;
      T(i, degree + 1 + j) = boundary_term_value(unit, 1.0 - grid[i] * grid[i]);
    }
  }
  Eigen::Map<const Eigen::VectorXd> rhs(w.data(), rows);
  Eigen::VectorXd a = T.colPivHouseholderQr().solve(rhs);
  for (int j = 0; j < nsing; ++j) (*sing)[j].coef = a(degree + 1 + j);
  return std::vector<double>(a.data(), a.data() + degree + 1);
}

// same-axis partials of a radial function P(|x - c|) via the chain rule
double radial_partial(const std::function<double(double, int)>& P, std::span<const double> y,
                      int axis, int order) {
  double r2 = 0.0;
  for (double v : y) r2 += v * v;
  const double r = std::sqrt(r2);
  if (order == 0) return P(r, 0);
  if (r < 1e-9) {  // even profile at the center: odd partials vanish,
    if (order == 1 || order == 3) return 0.0;
    return P(0.0, 2);  // and the P'(r)/r limit equals P''(0)
  }
  const double ya = y[axis];
  const double P1 = P(r, 1), P2 = P(r, 2);
  switch (order) {
    case 1:
      return P1 * ya / r;
    case 2:
      return P2 * ya * ya / r2 + P1 * (r2 - ya * ya) / (r2 * r);
    case 3: {
      const double P3 = P(r, 3);
      return P3 * ya * ya * ya / (r2 * r) + 3.0 * P2 * ya * (r2 - ya * ya) / (r2 * r2) +
             P1 * (3.0 * ya * ya * ya / (r2 * r2 * r) - 3.0 * ya / (r2 * r));
    }
    default:
      throw std::invalid_argument("radial partial: order must be 0..3");
  }
}

struct Stage2Result {
  double lambda = 0.0;
  std::vector<double> w;
  double bcore = 0.0;  // kappa B(phi; e, -e) / 2^s = w(1) / lambda
  long evals = 0;
  int iters = 0;
};

Stage2Result nystrom_refine(const GreenKernel& gk, const std::vector<double>& grid,
                            std::vector<double> w, double lambda0, const EigenConfig& cfg) {
  const int n = gk.n;
  const double s = gk.s;
  const int M = static_cast<int>(grid.size()) - 1;
  const double kap = green_constant(n, s);
  const double e1[2] = {1.0, 0.0};
  const double me1[2] = {-1.0, 0.0};

  Stage2Result out;
  out.lambda = lambda0;
  double lambda = lambda0;
  std::vector<double> Tw(M + 1, 0.0);
  double bcore = 0.0;

  for (int it = 0; it < cfg.nystrom_iters; ++it) {
    PchipCurve wc(std::vector<double>(grid), std::vector<double>(w), 0.0);
    ScalarField phif = profile_field(n, s, wc, &out.evals);
    for (int i = 0; i < M; ++i) {
      double x[2] = {grid[i], 0.0};
      const double Ti = kap * green_pairing(gk, phif, std::span<const double>(x, n));
      Tw[i] = Ti / std::pow(1.0 - grid[i] * grid[i], s);
    }
    bcore = kap *
            boundary_functional(gk, phif, std::span<const double>(e1, n),
                                std::span<const double>(me1, n)) /
            std::pow(2.0, s);
    Tw[M] = bcore;
    PchipCurve twc(std::vector<double>(grid), std::vector<double>(Tw), 0.0);

    const double num = profile_radial_integral(
        [&](double r) {
          const double wr = wc(r);
          return std::pow(1.0 - r * r, 2.0 * s) * wr * wr;
        },
        n, grid, cfg.quad);
    const double den = profile_radial_integral(
        [&](double r) { return std::pow(1.0 - r * r, 2.0 * s) * wc(r) * twc(r); }, n, grid,
        cfg.quad);
    const double lambda_new = num / den;

    for (int i = 0; i <= M; ++i) w[i] = lambda_new * Tw[i];
    PchipCurve wc2(std::vector<double>(grid), std::vector<double>(w), 0.0);
    const double nrm = std::sqrt(profile_radial_integral(
        [&](double r) {
          const double wr = wc2(r);
          return std::pow(1.0 - r * r, 2.0 * s) * wr * wr;
        },
        n, grid, cfg.quad));
    for (double& v : w) v /= nrm;
    bcore /= nrm;

    out.iters = it + 1;
    const bool done = std::abs(lambda_new - lambda) <= cfg.nystrom_tol * std::abs(lambda_new);
    lambda = lambda_new;
    if (done) break;
  }
  out.lambda = lambda;
  out.w = std::move(w);
  out.bcore = bcore;
  return out;
}

}  // namespace

RadialEigenpair solve_eigenpair(int n, double s, const EigenConfig& cfg) {
  if (n != 1 && n != 2) throw std::invalid_argument("eigenpair: n must be 1 or 2");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("eigenpair: s must lie in (0,1)");
  const int M = cfg.grid_nodes > 0 ? cfg.grid_nodes : (n == 1 ? 320 : 44);
  if (M < 8) throw std::invalid_argument("eigenpair: grid too coarse");

  GreenKernel gk{n, s, cfg.quad};
  const std::vector<double> grid = make_grid(M);
  const Eigen::MatrixXd K = assemble_hat_matrix(gk, grid);
  const std::vector<double> mass = hat_masses(n, grid);

  // stage 1: power iteration on the symmetrized interior operator.
  // phi = lambda K w with w = phi / (1-r^2)^s; in psi = sqrt(m) phi
  // coordinates the operator is symmetric up to discretization, and its
  // symmetrization is positive, so Rayleigh quotients increase monotonically.
  Eigen::VectorXd D(M), sqm(M);
  for (int i = 0; i < M; ++i) {
    D(i) = std::pow(1.0 - grid[i] * grid[i], s);
    sqm(i) = std::sqrt(mass[i]);
  }
  Eigen::MatrixXd S0(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) S0(i, j) = sqm(i) * K(i, j) / D(j) / sqm(j);
  Eigen::MatrixXd Shat = 0.5 * (S0 + S0.transpose());

  Eigen::VectorXd psi(M);
  for (int i = 0; i < M; ++i) psi(i) = sqm(i) * D(i);
  psi.normalize();
  std::vector<double> history;
  double mu = 0.0;
  for (int it = 0; it < cfg.power_iters; ++it) {
    Eigen::VectorXd y = Shat * psi;
    const double mu_new = psi.dot(y);
    history.push_back(mu_new);
    psi = y.normalized();
    if (it > 0 && std::abs(mu_new - mu) <= cfg.power_tol * std::abs(mu_new)) {
      mu = mu_new;
      break;
    }
    mu = mu_new;
  }
  if (!(mu > 0.0)) throw std::runtime_error("eigenpair: power stage failed to find a positive level");

  std::vector<double> w(M + 1, 0.0);
  for (int i = 0; i < M; ++i) w[i] = psi(i) / (sqm(i) * D(i));
  w[M] = w[M - 1];
  const double wmax = *std::max_element(w.begin(), w.end());
  for (double& v : w) v /= wmax;

  // stage 2: fixed point on the interpolated profile with the exact
  // boundary-limit row closing the r = 1 node.
  Stage2Result st2 = nystrom_refine(gk, grid, std::move(w), 1.0 / mu, cfg);

  RadialEigenpair pair;
  pair.n = n;
  pair.s = s;
  pair.lambda = st2.lambda;
  pair.grid = grid;
  pair.w = st2.w;
  pair.rayleigh_history = std::move(history);
  pair.source_evals = st2.evals;
  pair.nystrom_used = st2.iters;

  // stage 3: spectral polish. w extends smoothly and evenly through r = 1,
  // so a short Chebyshev series in 2 r^2 - 1 represents it without the C^1
  // breaks of the cubic; re-applying the operator through that smooth profile
  // scrubs the interpolation-kink error out of the node values. Two or three
  // passes push the pointwise eigen-residual to quadrature level.
  const auto smooth_eval = [](const std::vector<double>& c, const std::vector<BoundaryTerm>& sg,
                              double r) {
    double out = cheb_eval(c, 2.0 * r * r - 1.0);
    for (const BoundaryTerm& bt : sg) out += boundary_term_value(bt, 1.0 - r * r);
    return out;
  };

  {
    const int degree = std::min<int>(48, (static_cast<int>(grid.size()) - 1) / 2);
    const double kap = green_constant(n, s);
    const double e1[2] = {1.0, 0.0};
    const double me1[2] = {-1.0, 0.0};
    pair.w_sing = boundary_layer_terms(s);
    pair.w_cheb = cheb_fit(grid, pair.w, degree, &pair.w_sing);
    std::vector<double> Tw(M + 1, 0.0);
    for (int pass = 0; pass < 3; ++pass) {
      auto wsm = [&smooth_eval, c = pair.w_cheb, sg = pair.w_sing](double r) {
        return smooth_eval(c, sg, r);
      };
      ScalarField phif = profile_field_fn(n, s, wsm, &pair.source_evals);
      for (int i = 0; i < M; ++i) {
        double x[2] = {grid[i], 0.0};
        Tw[i] = kap * green_pairing(gk, phif, std::span<const double>(x, n)) /
                std::pow(1.0 - grid[i] * grid[i], s);
      }
      const double bcore = kap *
                           boundary_functional(gk, phif, std::span<const double>(e1, n),
                                               std::span<const double>(me1, n)) /
                           std::pow(2.0, s);
      Tw[M] = bcore;
      std::vector<BoundaryTerm> tw_sing = boundary_layer_terms(s);
      const std::vector<double> tw_cheb = cheb_fit(grid, Tw, degree, &tw_sing);
      const double num = profile_radial_integral(
          [&](double r) {
            const double wr = wsm(r);
            return std::pow(1.0 - r * r, 2.0 * s) * wr * wr;
          },
          n, grid, cfg.quad);
      const double den = profile_radial_integral(
          [&](double r) {
            return std::pow(1.0 - r * r, 2.0 * s) * wsm(r) * smooth_eval(tw_cheb, tw_sing, r);
          },
          n, grid, cfg.quad);
      const double lambda_new = num / den;
      for (int i = 0; i <= M; ++i) pair.w[i] = lambda_new * Tw[i];
      std::vector<BoundaryTerm> wsing = boundary_layer_terms(s);
      std::vector<double> wfit = cheb_fit(grid, pair.w, degree, &wsing);
      const double nrm = std::sqrt(profile_radial_integral(
          [&](double r) {
            const double wr = smooth_eval(wfit, wsing, r);
            return std::pow(1.0 - r * r, 2.0 * s) * wr * wr;
          },
          n, grid, cfg.quad));
      for (double& v : pair.w) v /= nrm;
      for (double& v : wfit) v /= nrm;
      for (BoundaryTerm& bt : wsing) bt.coef /= nrm;
      const bool done = std::abs(lambda_new - pair.lambda) <= cfg.nystrom_tol * lambda_new;
      pair.lambda = lambda_new;
      pair.w_cheb = std::move(wfit);
      pair.w_sing = std::move(wsing);
      if (done && pass > 0) break;
    }
    double worst = 0.0;
    for (size_t i = 0; i < grid.size(); ++i)
      worst = std::max(worst, std::abs(smooth_eval(pair.w_cheb, pair.w_sing, grid[i]) - pair.w[i]));
    pair.cheb_fit_residual = worst;
  }

  // close the boundary node against the final profile and freeze the
  // boundary growth coefficient
  {
    auto wsm = [&smooth_eval, c = pair.w_cheb, sg = pair.w_sing](double r) {
      return smooth_eval(c, sg, r);
    };
    ScalarField phif = profile_field_fn(n, s, wsm, &pair.source_evals);
    const double e1[2] = {1.0, 0.0};
    const double me1[2] = {-1.0, 0.0};
    const double B = boundary_functional(gk, phif, std::span<const double>(e1, n),
                                         std::span<const double>(me1, n));
    pair.kappa_star = green_constant(n, s) * B;
    pair.boundary_value = pair.lambda * pair.kappa_star / std::pow(2.0, s);
    pair.w.back() = pair.boundary_value;
  }
  pair.w_curve = PchipCurve(std::vector<double>(grid), std::vector<double>(pair.w), 0.0);
  return pair;
}

double RadialEigenpair::w_at(double r) const { return w_curve(std::min(std::abs(r), 1.0)); }

double RadialEigenpair::w_smooth(double r) const {
  r = std::min(std::abs(r), 1.0);
  double out = cheb_eval(w_cheb, 2.0 * r * r - 1.0);
  for (const BoundaryTerm& bt : w_sing) out += boundary_term_value(bt, 1.0 - r * r);
  return out;
}

double RadialEigenpair::w_smooth_deriv(double r, int order) const {
  if (order < 0 || order > 6) throw std::invalid_argument("w_smooth_deriv: order must be 0..6");
  r = std::min(std::abs(r), 1.0);
  if (order == 0) return w_smooth(r);
  double out = cheb_radial_deriv(w_cheb, r, order);
  for (const BoundaryTerm& bt : w_sing) out += boundary_term_deriv(bt, r, order);
  return out;
}

double RadialEigenpair::phi_smooth(double r) const {
  r = std::abs(r);
  if (r >= 1.0) return 0.0;
  return std::pow(1.0 - r * r, s) * w_smooth(r);
}

double RadialEigenpair::phi_smooth_deriv(double r, int order) const {
  if (order < 0 || order > 6) throw std::invalid_argument("phi_smooth_deriv: order must be 0..6");
  r = std::abs(r);
  if (r >= 1.0) throw std::invalid_argument("phi_smooth_deriv: defined on the open ball only");
  double out = 0.0;
  for (int j = 0; j <= order; ++j)
    out += binom_small(order, j) * weight_deriv(s, r, j) * w_smooth_deriv(r, order - j);
  return out;
}

double RadialEigenpair::phi(double r) const {
  r = std::abs(r);
  if (r >= 1.0) return 0.0;
  return std::pow(1.0 - r * r, s) * w_curve(r);
}

double RadialEigenpair::phi_deriv(double r, int order) const {
  if (order < 0 || order > 3) throw std::invalid_argument("phi_deriv: order must be 0..3");
  r = std::abs(r);
  if (r >= 1.0) throw std::invalid_argument("phi_deriv: defined on the open ball only");
  double A[4];
  profile_weight_derivs(s, r, A);
  double out = 0.0;
  for (int j = 0; j <= order; ++j) out += binom_small(order, j) * A[j] * w_curve.deriv(r, order - j);
  return out;
}

ScalarField RadialEigenpair::as_field(std::span<const double> center) const {
  std::vector<double> c(n, 0.0);
  for (size_t i = 0; i < center.size() && i < c.size(); ++i) c[i] = center[i];
  ScalarField f;
  f.dim = n;
  f.smooth_center = c;
  f.smooth_radius = 0.9995;
  double clen = 0.0;
  for (double v : c) clen += v * v;
  f.support_radius = 1.0 + std::sqrt(clen);
  const RadialEigenpair self = *this;  // value copy keeps the field self-contained
  const int dim = n;
  f.eval = [self, c, dim](std::span<const double> x) {
    double r2 = 0.0;
    for (int i = 0; i < dim; ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
    return self.phi(std::sqrt(r2));
  };
  f.ray_kinks = [c, dim](std::span<const double> base, std::span<const double> step) {
    std::vector<double> shifted(dim);
    for (int i = 0; i < dim; ++i) shifted[i] = base[i] - c[i];
    return sphere_crossings(shifted, step.subspan(0, dim), 1.0);
  };
  f.analytic_partial = [self, c, dim](std::span<const double> x, int axis, int order) {
    std::vector<double> y(dim);
    double r2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      y[i] = x[i] - c[i];
      r2 += y[i] * y[i];
    }
    if (r2 >= 1.0) return 0.0;
    auto P = [&self](double r, int k) { return self.phi_deriv(r, k); };
    return radial_partial(P, y, axis, order);
  };
  return f;
}

double ScaledEigenfunction::value(double r) const { return base->phi_smooth(r / radius); }

double ScaledEigenfunction::radial_deriv(double r, int order) const {
  return base->phi_smooth_deriv(r / radius, order) / std::pow(radius, order);
}

ScalarField ScaledEigenfunction::as_field(std::span<const double> center) const {
  const int dim = base->n;
  std::vector<double> c(dim, 0.0);
  for (size_t i = 0; i < center.size() && i < c.size(); ++i) c[i] = center[i];
  ScalarField f;
  f.dim = dim;
  f.smooth_center = c;
  f.smooth_radius = 0.9995 * radius;
  double clen = 0.0;
  for (double v : c) clen += v * v;
  f.support_radius = radius + std::sqrt(clen);
  const ScaledEigenfunction self = *this;
  f.eval = [self, c, dim](std::span<const double> x) {
    double r2 = 0.0;
    for (int i = 0; i < dim; ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
    const double r = std::sqrt(r2);
    return r >= self.radius ? 0.0 : self.value(r);
  };
  const double R = radius;
  f.ray_kinks = [c, dim, R](std::span<const double> base_pt, std::span<const double> step) {
    std::vector<double> shifted(dim);
    for (int i = 0; i < dim; ++i) shifted[i] = base_pt[i] - c[i];
    return sphere_crossings(shifted, step.subspan(0, dim), R);
  };
  f.analytic_partial = [self, c, dim](std::span<const double> x, int axis, int order) {
    std::vector<double> y(dim);
    double r2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      y[i] = x[i] - c[i];
      r2 += y[i] * y[i];
    }
    if (r2 >= self.radius * self.radius) return 0.0;
    auto P = [&self](double r, int k) { return self.radial_deriv(r, k); };
    return radial_partial(P, y, axis, order);
  };
  return f;
}

ScaledEigenfunction scale_to_eigenvalue(std::shared_ptr<const RadialEigenpair> base,
                                        double lambda_target) {
  if (!base) throw std::invalid_argument("scale_to_eigenvalue: null eigenpair");
  if (!(lambda_target > 0.0))
    throw std::invalid_argument("scale_to_eigenvalue: target must be positive");
  ScaledEigenfunction out;
  out.base = std::move(base);
  out.radius = std::pow(out.base->lambda / lambda_target, 1.0 / (2.0 * out.base->s));
  out.lambda = lambda_target;
  return out;
}

std::vector<ResidualRow> verify_eigen_residual(const RadialEigenpair& pair,
                                               std::span<const double> radii,
                                               const QuadratureConfig& q) {
  ScalarField f = pair.as_field();
  std::vector<ResidualRow> out;
  for (double r : radii) {
    double x[2] = {r, 0.0};
    FracResult fr = frac_laplacian_at(f, std::span<const double>(x, pair.n), pair.s, q);
    ResidualRow row;
    row.radius = r;
    row.phi_value = pair.phi(r);
    row.residual = fr.value - pair.lambda * row.phi_value;
    out.push_back(row);
  }
  return out;
}

BoundaryLawRow boundary_law_probe(const RadialEigenpair& pair, double eps,
                                  std::span<const double> X) {
  if (static_cast<int>(X.size()) != pair.n)
    throw std::invalid_argument("boundary law probe: dimension mismatch");
  BoundaryLawRow row;
  row.X.assign(X.begin(), X.end());
  double r2 = 0.0;
  for (int i = 0; i < pair.n; ++i) {
    const double xi = (i == 0 ? 1.0 : 0.0) + eps * X[i];
    r2 += xi * xi;
  }
  row.value = pair.phi(std::sqrt(r2));
  const double inward = std::max(0.0, -X[0]);
  row.predicted =
      std::pow(eps, pair.s) * pair.kappa_star * pair.lambda * std::pow(inward, pair.s);
  row.ratio = row.predicted == 0.0 ? 0.0 : row.value / row.predicted;
  return row;
}

DistributionalCheck verify_distributional(const RadialEigenpair& pair, std::span<const int> alpha,
                                          double eps, std::span<const double> psi_center,
                                          double psi_halfwidth, const QuadratureConfig& q) {
  const int n = pair.n;
  if (static_cast<int>(alpha.size()) != n || static_cast<int>(psi_center.size()) != n)
    throw std::invalid_argument("distributional check: dimension mismatch");
  int order = 0;
  for (int a : alpha) {
    if (a < 0 || a > 3) throw std::invalid_argument("distributional check: order out of range");
    order += a;
  }
  if (order > 3) throw std::invalid_argument("distributional check: total order must be <= 3");
  if (!(psi_halfwidth > 0.0) || !(psi_center[0] + psi_halfwidth < 0.0))
    throw std::invalid_argument(
        "distributional check: bump must be supported in the inward half-space");

  DistributionalCheck out;
  out.alpha.assign(alpha.begin(), alpha.end());
  out.eps = eps;

  const double h = psi_halfwidth;
  auto dpsi = [&](std::span<const double> X) {
    double v = 1.0;
    for (int i = 0; i < n; ++i)
      v *= bump_c((X[i] - psi_center[i]) / h, alpha[i]) / std::pow(h, alpha[i]);
    return v;
  };
  auto phi_at = [&](std::span<const double> X) {
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double xi = (i == 0 ? 1.0 : 0.0) + eps * X[i];
      r2 += xi * xi;
    }
    return pair.phi(std::sqrt(r2));
  };

  double integral = 0.0;
  if (n == 1) {
    integral = integrate_graded(
        [&](double x0) {
          const double X[1] = {x0};
          return phi_at(std::span<const double>(X, 1)) * dpsi(std::span<const double>(X, 1));
        },
        psi_center[0] - h, psi_center[0] + h, {}, q);
  } else {
    integral = integrate_graded(
        [&](double x1) {
          return integrate_graded(
              [&](double x0) {
                const double X[2] = {x0, x1};
                return phi_at(std::span<const double>(X, 2)) * dpsi(std::span<const double>(X, 2));
              },
              psi_center[0] - h, psi_center[0] + h, {}, q);
        },
        psi_center[1] - h, psi_center[1] + h, {}, q);
  }
  const double sgn = order % 2 == 0 ? 1.0 : -1.0;
  out.lhs = sgn * std::pow(eps, -pair.s) * integral;

  bool cross = false;
  for (int i = 1; i < n; ++i) cross = cross || alpha[i] > 0;
  if (cross) {
    out.degenerate = true;
    out.rhs = 0.0;
    out.rel_err = std::abs(out.lhs);
    return out;
  }
  double fall = 1.0;
  for (int k = 0; k < order; ++k) fall *= pair.s - k;
  const double I0 = integrate_graded(
      [&](double x0) {
        return std::pow(-x0, pair.s - order) * bump_c((x0 - psi_center[0]) / h);
      },
      psi_center[0] - h, psi_center[0] + h, {}, q);
  double rest = 1.0;
  for (int i = 1; i < n; ++i)
    rest *= integrate_graded([&](double t) { return bump_c((t - psi_center[i]) / h); },
                             psi_center[i] - h, psi_center[i] + h, {}, q);
  const double sign_e = alpha[0] % 2 == 0 ? 1.0 : -1.0;  // (-e)^alpha with e = first axis
  out.rhs = pair.kappa_star * pair.lambda * fall * sign_e * I0 * rest;
  out.rel_err = out.rhs == 0.0 ? std::abs(out.lhs) : std::abs(out.lhs - out.rhs) / std::abs(out.rhs);
  out.degenerate = out.rhs == 0.0;
  return out;
}

}  // namespace fracap
