#include "fracap/spanner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fracap {

namespace {

double vec_norm(std::span<const double> v) {
  double r2 = 0.0;
  for (double x : v) r2 += x * x;
  return std::sqrt(r2);
}

double binom_d(int m, int j) {
  double out = 1.0;
  for (int i = 0; i < j; ++i) out = out * (m - i) / (i + 1);
  return out;
}

}  // namespace

double OdeSolution::deriv(double x, int order) const {
  std::complex<double> acc = 0.0;
  for (size_t k = 0; k < roots.size(); ++k)
    acc += coefficients[k] * std::pow(roots[k], order) * std::exp(roots[k] * x);
  return acc.real();
}

OdeSolution ode_solve(int m, double a_bar, int k_max) {
  if (m < 1) throw std::invalid_argument("ode_solve: m must be positive");
  if (std::abs(std::abs(a_bar) - 1.0) > 0.0)
    throw std::invalid_argument("ode_solve: a_bar must be +1 or -1");
  if (k_max < m - 1) k_max = m - 1;

  OdeSolution v;
  v.m = m;
  v.a_bar = a_bar;
  // m-th roots of -a_bar, exact combination basis e^{r x}
  const double arg0 = a_bar > 0 ? M_PI : 0.0;
  for (int k = 0; k < m; ++k) {
    const double th = (arg0 + 2.0 * M_PI * k) / m;
    v.roots.emplace_back(std::cos(th), std::sin(th));
  }
  // initial conditions v^(i)(0) = 1, i < m: Vandermonde in the roots
  Eigen::MatrixXcd V(m, m);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) V(i, k) = std::pow(v.roots[k], i);
  const Eigen::VectorXcd c = V.fullPivLu().solve(Eigen::VectorXcd::Ones(m));
  v.coefficients.assign(c.data(), c.data() + m);

  // derivative table at 0 by the exact recursion d^{i+m} = -a_bar d^i;
  // every entry is +-1, so in particular none vanish
  v.derivs_at_zero.resize(k_max + 1);
  for (int i = 0; i <= k_max; ++i)
    v.derivs_at_zero[i] = i < m ? 1.0 : -a_bar * v.derivs_at_zero[i - m];
  return v;
}

RateBalance balance_rates(const OperatorSpec& spec, std::span<const double> t,
                          std::span<const double> lambda_star) {
  spec.validate();
  const int d = spec.local_dim();
  const int N = static_cast<int>(spec.nonlocal_terms.size());
  if (static_cast<int>(t.size()) != d)
    throw std::invalid_argument("balance_rates: t has wrong dimension");
  if (static_cast<int>(lambda_star.size()) != N)
    throw std::invalid_argument("balance_rates: one base eigenvalue per nonlocal block");
  if (N == 0) throw std::invalid_argument("balance_rates: no nonlocal block to balance");

  RateBalance out;
  out.lambda.assign(lambda_star.begin(), lambda_star.end());
  if (d == 0) {
    // purely nonlocal: no local budget to close, all rates stay at the base
    // eigenvalue and the (positive) defect is carried by the element
    out.accepted = true;
    return out;
  }
  const double AN = spec.nonlocal_terms[N - 1].A;
  if (!(AN > 0.0))
    throw std::invalid_argument("balance_rates: last nonlocal coefficient must be positive");
  double budget = 0.0;
  for (int j = 0; j < d; ++j)
    budget += std::abs(spec.local_terms[j].a) * std::pow(t[j], spec.local_terms[j].m);
  for (int j = 0; j + 1 < N; ++j) budget -= spec.nonlocal_terms[j].A * lambda_star[j];
  const double lam_last = budget / AN;
  if (!(lam_last > 0.0)) return out;  // t outside the admissible set: rejection value
  out.lambda[N - 1] = lam_last;
  out.accepted = true;
  return out;
}

double Cutoff::radial(double r, int order) const {
  const double half = 0.5 * rho;
  r = std::abs(r);
  if (r <= half) return order == 0 ? 1.0 : 0.0;
  if (r >= rho) return 0.0;
  if (order > 3)
    throw std::invalid_argument("cutoff: derivatives beyond order 3 inside the transition shell");
  return smoothstep_c((rho - r) / half, order) * std::pow(-1.0 / half, order);
}

double Cutoff::value(std::span<const double> x) const { return radial(vec_norm(x)); }

double DictionaryElement::value(std::span<const double> xX) const {
  if (static_cast<int>(xX.size()) != dim())
    throw std::invalid_argument("dictionary element: point dimension mismatch");
  const int d = spec.local_dim();
  double out = 1.0;
  if (d > 0) {
    out *= cutoff.value(xX.subspan(0, d));
    if (out == 0.0) return 0.0;
    for (int j = 0; j < d; ++j) out *= ode[j].value(t[j] * xX[j]);
  }
  const int N = static_cast<int>(spec.nonlocal_terms.size());
  for (int j = 0; j < N; ++j) {
    const int off = spec.block_offset(j);
    const int nj = spec.nonlocal_terms[j].n;
    double r2 = 0.0;
    for (int i = 0; i < nj; ++i) {
      const double y = xX[off + i] + centers[j][i];
      r2 += y * y;
    }
    const double r = std::sqrt(r2);
    if (r >= phis[j].radius) return 0.0;
    out *= phis[j].value(r);
  }
  return out;
}

double DictionaryElement::partial(std::span<const double> xX, std::span<const int> orders) const {
  if (static_cast<int>(xX.size()) != dim() || orders.size() != xX.size())
    throw std::invalid_argument("dictionary element: partial dimension mismatch");
  const int d = spec.local_dim();
  const int N = static_cast<int>(spec.nonlocal_terms.size());

  // local factor group tau(x) prod_j v_j(t_j x_j)
  double out = 1.0;
  if (d > 0) {
    const std::span<const double> xloc = xX.subspan(0, d);
    const double rloc = vec_norm(xloc);
    if (rloc <= 0.499 * cutoff.rho) {
      // plateau: every cutoff derivative vanishes, the ODE factors separate
      for (int j = 0; j < d; ++j)
        out *= std::pow(t[j], orders[j]) * ode[j].deriv(t[j] * xX[j], orders[j]);
    } else {
      // Leibniz over (tau, v_1, ..., v_d); tau couples the local axes
      std::vector<int> kappa(d, 0);
      double acc = 0.0;
      for (;;) {
        double term = 1.0;
        int kmag = 0;
        for (int j = 0; j < d; ++j) {
          term *= binom_d(orders[j], kappa[j]) * std::pow(t[j], orders[j] - kappa[j]) *
                  ode[j].deriv(t[j] * xX[j], orders[j] - kappa[j]);
          kmag += kappa[j];
        }
        if (kmag == 0) {
          term *= cutoff.value(xloc);
        } else {
          term *= radial_mixed_partial([this](double r, int k) { return cutoff.radial(r, k); },
                                       xloc, kappa);
        }
        acc += term;
        // advance kappa through the box prod [0, orders_j]
        int j = 0;
        while (j < d && ++kappa[j] > orders[j]) kappa[j++] = 0;
        if (j == d) break;
      }
      out = acc;
    }
  }

  for (int j = 0; j < N; ++j) {
    const int off = spec.block_offset(j);
    const int nj = spec.nonlocal_terms[j].n;
    double y[2] = {0.0, 0.0};
    double r2 = 0.0;
    for (int i = 0; i < nj; ++i) {
      y[i] = xX[off + i] + centers[j][i];
      r2 += y[i] * y[i];
    }
    if (r2 >= phis[j].radius * phis[j].radius) return 0.0;
    const auto& phi = phis[j];
    out *= radial_mixed_partial([&phi](double r, int k) { return phi.radial_deriv(r, k); },
                                std::span<const double>(y, nj),
                                orders.subspan(off, nj));
  }
  return out;
}

ScalarField DictionaryElement::as_field() const {
  ScalarField f;
  const int nu = dim();
  const int d = spec.local_dim();
  const int N = static_cast<int>(spec.nonlocal_terms.size());
  f.dim = nu;

  double sup2 = d > 0 ? cutoff.rho * cutoff.rho : 0.0;
  double smooth = d > 0 ? 0.5 * cutoff.rho : std::numeric_limits<double>::max();
  for (int j = 0; j < N; ++j) {
    const double rj = phis[j].radius;
    const double cl = vec_norm(centers[j]);
    sup2 += (rj + cl) * (rj + cl);
    smooth = std::min(smooth, rj - cl);
  }
  f.support_radius = std::sqrt(sup2);
  f.smooth_radius = smooth;

  const DictionaryElement self = *this;  // value copy keeps the field self-contained
  f.eval = [self](std::span<const double> x) { return self.value(x); };
  f.analytic_partial = [self, nu](std::span<const double> x, int axis, int order) {
    std::vector<int> orders(nu, 0);
    orders[axis] = order;
    return self.partial(x, orders);
  };
  // quadrature break radii along a ray: support spheres of the shifted
  // eigenfunctions, plus the cutoff shell edges (smooth but fast-varying)
  const OperatorSpec sp = spec;
  const std::vector<std::vector<double>> ctr = centers;
  std::vector<double> radii(N);
  for (int j = 0; j < N; ++j) radii[j] = phis[j].radius;
  const double rho_cut = cutoff.rho;
  f.ray_kinks = [sp, ctr, radii, rho_cut, d, N](std::span<const double> base,
                                                std::span<const double> step) {
    std::vector<double> out;
    if (d > 0) {
      bool moving = false;
      for (int i = 0; i < d; ++i) moving = moving || step[i] != 0.0;
      if (moving) {
        for (double r : {0.5 * rho_cut, rho_cut}) {
          for (double b : sphere_crossings(base.subspan(0, d), step.subspan(0, d), r))
            out.push_back(b);
        }
      }
    }
    for (int j = 0; j < N; ++j) {
      const int off = sp.block_offset(j);
      const int nj = sp.nonlocal_terms[j].n;
      bool moving = false;
      for (int i = 0; i < nj; ++i) moving = moving || step[off + i] != 0.0;
      if (!moving) continue;
      double shifted[2];
      for (int i = 0; i < nj; ++i) shifted[i] = base[off + i] + ctr[j][i];
      for (double b : sphere_crossings(std::span<const double>(shifted, nj),
                                       step.subspan(off, nj), radii[j]))
        out.push_back(b);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  return f;
}

DictionaryElement build_element(const OperatorSpec& spec, std::span<const double> t,
                                const std::vector<std::vector<double>>& directions,
                                const std::vector<std::vector<double>>& offsets, double eps,
                                const std::vector<std::shared_ptr<const RadialEigenpair>>& bases,
                                const Cutoff& cutoff) {
  spec.validate();
  const int d = spec.local_dim();
  const int N = static_cast<int>(spec.nonlocal_terms.size());
  if (static_cast<int>(t.size()) != d)
    throw std::invalid_argument("build_element: t has wrong dimension");
  if (static_cast<int>(directions.size()) != N || static_cast<int>(offsets.size()) != N ||
      static_cast<int>(bases.size()) != N)
    throw std::invalid_argument("build_element: one direction/offset/base per nonlocal block");
  if (!(eps > 0.0)) throw std::invalid_argument("build_element: eps must be positive");
  if (!(cutoff.rho > 0.0)) throw std::invalid_argument("build_element: cutoff radius must be positive");

  std::vector<double> lamstar(N);
  for (int j = 0; j < N; ++j) {
    if (!bases[j]) throw std::invalid_argument("build_element: missing base eigenpair");
    if (bases[j]->n != spec.nonlocal_terms[j].n ||
        std::abs(bases[j]->s - spec.nonlocal_terms[j].s) > 1e-14)
      throw std::invalid_argument("build_element: base eigenpair does not match its block");
    lamstar[j] = bases[j]->lambda;
  }
  const RateBalance bal = balance_rates(spec, t, lamstar);
  if (!bal.accepted)
    throw std::invalid_argument("build_element: rates rejected (t outside the admissible set)");

  DictionaryElement el;
  el.spec = spec;
  el.t.assign(t.begin(), t.end());
  el.rates = bal.lambda;
  el.directions = directions;
  el.offsets = offsets;
  el.eps = eps;
  el.cutoff = cutoff;

  double defect = 0.0;
  for (int j = 0; j < N; ++j) defect += spec.nonlocal_terms[j].A * bal.lambda[j];
  for (int j = 0; j < d; ++j)
    defect -= std::abs(spec.local_terms[j].a) * std::pow(t[j], spec.local_terms[j].m);
  el.harmonic_defect = defect;

  double nb = 0.5 * cutoff.rho;
  for (int j = 0; j < N; ++j) {
    el.phis.push_back(scale_to_eigenvalue(bases[j], bal.lambda[j]));
    const double rj = el.phis[j].radius;
    const int nj = spec.nonlocal_terms[j].n;
    if (static_cast<int>(directions[j].size()) != nj ||
        static_cast<int>(offsets[j].size()) != nj)
      throw std::invalid_argument("build_element: direction/offset dimension mismatch");
    const double elen = vec_norm(directions[j]);
    if (std::abs(elen - rj) > 1e-8 * std::max(1.0, rj))
      throw std::invalid_argument("build_element: direction must sit on the support sphere");
    double dot = 0.0;
    for (int i = 0; i < nj; ++i) dot += directions[j][i] * offsets[j][i];
    if (!(dot < 0.0)) throw std::invalid_argument("build_element: offset must point inward");
    std::vector<double> c(nj);
    for (int i = 0; i < nj; ++i) c[i] = directions[j][i] + eps * offsets[j][i];
    const double cl = vec_norm(c);
    if (!(cl < rj))
      throw std::invalid_argument("build_element: eps too large, shifted center leaves the ball");
    nb = std::min(nb, rj - cl);
    el.centers.push_back(std::move(c));
  }
  for (int j = 0; j < d; ++j) {
    const double aj = spec.local_terms[j].a;
    el.ode.push_back(ode_solve(spec.local_terms[j].m, aj > 0 ? 1.0 : -1.0, 32));
  }
  el.neighborhood = 0.9 * nb;
  return el;
}

double element_residual(const DictionaryElement& elem, int npoints, unsigned seed,
                        const QuadratureConfig& q) {
  const ScalarField f = elem.as_field();
  const int nu = elem.dim();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0.0;
  std::vector<double> y(nu);
  for (int p = 0; p < npoints; ++p) {
    for (;;) {
      double r2 = 0.0;
      for (double& v : y) {
        v = U(rng);
        r2 += v * v;
      }
      if (r2 <= 1.0) break;
    }
    for (double& v : y) v *= 0.1 * elem.neighborhood;
    const FracResult R = lambda_residual_at(elem.spec, f, y, q);
    worst = std::max(worst, std::abs(R.value - elem.harmonic_defect * f.eval(y)));
  }
  return worst;
}

std::vector<std::vector<int>> multi_indices_upto(int nu, int K) {
  if (nu < 1 || K < 0) throw std::invalid_argument("multi_indices_upto: bad arguments");
  std::vector<std::vector<int>> out;
  std::vector<int> cur(nu, 0);
  // ordered by total degree, then lexicographically within each degree
  for (int total = 0; total <= K; ++total) {
    std::fill(cur.begin(), cur.end(), 0);
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
      if (pos == nu - 1) {
        cur[pos] = remaining;
        out.push_back(cur);
        return;
      }
      for (int v = 0; v <= remaining; ++v) {
        cur[pos] = v;
        self(self, pos + 1, remaining - v);
      }
    };
    rec(rec, 0, total);
  }
  return out;
}

int DerivativeMatrix::numerical_rank(double rel_cutoff) const {
  if (singular_values.empty()) return 0;
  const double cut = rel_cutoff * singular_values.front();
  int rank = 0;
  for (double s : singular_values)
    if (s >= cut) ++rank;
  return rank;
}

DerivativeMatrix assemble_matrix(const std::vector<DictionaryElement>& elems, int K) {
  if (elems.empty()) throw std::invalid_argument("assemble_matrix: empty dictionary");
  if (K < 0 || K > 6) throw std::invalid_argument("assemble_matrix: K supported in 0..6");
  const int nu = elems[0].dim();
  for (const auto& e : elems)
    if (e.dim() != nu) throw std::invalid_argument("assemble_matrix: mixed element dimensions");

  DerivativeMatrix M;
  M.K = K;
  M.index_set = multi_indices_upto(nu, K);
  M.rows.resize(static_cast<int>(elems.size()), M.cols());
  const std::vector<double> origin(nu, 0.0);
  for (size_t i = 0; i < elems.size(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      M.rows(static_cast<int>(i), j) = elems[i].partial(origin, M.index_set[j]);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M.rows);
  const auto& sv = svd.singularValues();
  M.singular_values.assign(sv.data(), sv.data() + sv.size());
  return M;
}

std::vector<double> span_solve(const DerivativeMatrix& mat, std::span<const double> target) {
  if (static_cast<int>(target.size()) != mat.cols())
    throw std::invalid_argument("span_solve: target size mismatch");
  const Eigen::MatrixXd A = mat.rows.transpose();
  const Eigen::Map<const Eigen::VectorXd> b(target.data(), target.size());
  if (b.norm() == 0.0) return std::vector<double>(A.cols(), 0.0);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  const Eigen::VectorXd c = svd.solve(b);
  const double resid = (A * c - b).norm();
  if (resid > 1e-8 * b.norm()) throw SpanRankError(resid);
  return std::vector<double>(c.data(), c.data() + c.size());
}

std::vector<DictionaryElement> sample_dictionary(
    const OperatorSpec& spec, const std::vector<std::shared_ptr<const RadialEigenpair>>& bases,
    const DictionaryPolicy& policy) {
  spec.validate();
  const int d = spec.local_dim();
  const int N = static_cast<int>(spec.nonlocal_terms.size());
  if (static_cast<int>(bases.size()) != N)
    throw std::invalid_argument("sample_dictionary: one base eigenpair per block");
  const Cutoff cut{policy.cutoff_rho};

  // cartesian power of the t grid over the local axes
  std::vector<std::vector<double>> t_tuples;
  if (d == 0) {
    t_tuples.push_back({});
  } else {
    t_tuples.emplace_back();
    for (int j = 0; j < d; ++j) {
      std::vector<std::vector<double>> next;
      for (const auto& partial_t : t_tuples)
        for (double tv : policy.t_grid) {
          next.push_back(partial_t);
          next.back().push_back(tv);
        }
      t_tuples = std::move(next);
    }
  }

  // unit direction grids per block (2 per 1-D block, 4 per 2-D block)
  std::vector<std::vector<std::vector<double>>> unit_dirs(N);
  for (int j = 0; j < N; ++j) {
    const int nj = spec.nonlocal_terms[j].n;
    if (nj == 1) {
      unit_dirs[j] = {{1.0}, {-1.0}};
    } else {
      for (int k = 0; k < 4; ++k) {
        const double th = 2.0 * M_PI * k / 4;
        unit_dirs[j].push_back({std::cos(th), std::sin(th)});
      }
    }
  }
  std::vector<int> dir_pick(N, 0);

  std::vector<double> lamstar(N);
  for (int j = 0; j < N; ++j) lamstar[j] = bases[j]->lambda;

  std::vector<DictionaryElement> out;
  for (const auto& tv : t_tuples) {
    const RateBalance bal = balance_rates(spec, tv, lamstar);
    if (!bal.accepted) continue;
    std::vector<double> radii(N);
    double rmin = std::numeric_limits<double>::max();
    for (int j = 0; j < N; ++j) {
      radii[j] = std::pow(lamstar[j] / bal.lambda[j], 1.0 / (2.0 * spec.nonlocal_terms[j].s));
      rmin = std::min(rmin, radii[j]);
    }

    std::fill(dir_pick.begin(), dir_pick.end(), 0);
    for (;;) {
      for (double rho_y : policy.rho_Y) {
        for (double ef : policy.eps_fracs) {
          if (static_cast<int>(out.size()) >= policy.max_elements) return out;
          std::vector<std::vector<double>> dirs(N), offs(N);
          for (int j = 0; j < N; ++j) {
            const auto& u = unit_dirs[j][dir_pick[j]];
            dirs[j].resize(u.size());
            offs[j].resize(u.size());
            for (size_t i = 0; i < u.size(); ++i) {
              dirs[j][i] = radii[j] * u[i];
              offs[j][i] = -rho_y * u[i];
            }
          }
          out.push_back(build_element(spec, tv, dirs, offs, ef * rmin, bases, cut));
        }
      }
      int j = 0;
      while (j < N && ++dir_pick[j] >= static_cast<int>(unit_dirs[j].size())) dir_pick[j++] = 0;
      if (j == N) break;
    }
  }
  return out;
}

}  // namespace fracap
