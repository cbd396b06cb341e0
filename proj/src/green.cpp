#include "fracap/green.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>

#include "fracap/constants.hpp"

namespace fracap {

namespace {

constexpr int kMaxDim = 8;
constexpr double kSeriesEdge = 0.5;  // series branch for r0 <= 1/2
constexpr double kAnchor = 2.0;      // analytic large-r0 expansion beyond this

struct Tables {
  std::vector<double> b;   // binom(-n/2, k)
  std::vector<double> c;   // b_k / (k+s)
  double t_half = 0.0;     // int_0^{1/2} t^{s-1}(1+t)^{-n/2} dt (series value)
  double t_anchor = 0.0;   // int_0^{2} (series + quadrature, cached)
};

std::int64_t dbits(double s) {
  std::int64_t b;
  __builtin_memcpy(&b, &s, sizeof(b));
  return b;
}

double raw_integrand(int n, double s, double t) {
  return std::pow(t, s - 1.0) * std::pow(1.0 + t, -0.5 * n);
}

// series value of int_0^{r0}, valid for r0 <= 1/2
double series_value(const Tables& tb, double s, double r0v, int terms) {
  const int kmax = std::min<int>(terms, static_cast<int>(tb.c.size()));
  double acc = 0.0, p = 1.0;
  for (int k = 0; k < kmax; ++k) {
    acc += tb.c[k] * p;
    p *= r0v;
  }
  return acc * std::pow(r0v, s);
}

const Tables& tables(int n, double s, int terms) {
  static std::map<std::pair<int, std::int64_t>, Tables> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, dbits(s));
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  Tables tb;
  const int kmax = std::max(terms, 80);
  tb.b.resize(kmax);
  tb.c.resize(kmax);
  double b = 1.0;
  for (int k = 0; k < kmax; ++k) {
    tb.b[k] = b;
    tb.c[k] = b / (k + s);
    b *= (-0.5 * n - k) / (k + 1.0);
  }
  tb.t_half = series_value(tb, s, kSeriesEdge, kmax);
  QuadratureConfig q;
  q.radial_nodes = 24;
  tb.t_anchor = tb.t_half + integrate_graded([&](double t) { return raw_integrand(n, s, t); },
                                             kSeriesEdge, kAnchor, {}, q);
  return cache.emplace(key, std::move(tb)).first->second;
}

// int_0^{r0} t^{s-1}(1+t)^{-n/2} dt, fast hybrid
double green_tint(int n, double s, double r0v, const QuadratureConfig& q) {
  if (!(r0v > 0.0)) return 0.0;
  const Tables& tb = tables(n, s, q.series_terms);
  if (r0v <= kSeriesEdge) return series_value(tb, s, r0v, q.series_terms);
  if (r0v < kAnchor) {
    QuadratureConfig qq = q;
    qq.grading_levels = 10;
    return tb.t_half + integrate_graded([&](double t) { return raw_integrand(n, s, t); },
                                        kSeriesEdge, r0v, {}, qq);
  }
  // large r0: expand (1+t)^{-n/2} = t^{-n/2} (1+1/t)^{-n/2} and integrate
  // term by term from the anchor; ratio <= 1/2 so 60 terms reach roundoff
  double acc = tb.t_anchor;
  const double pa = std::pow(kAnchor, s - 0.5 * n);
  const double pr = std::pow(r0v, s - 0.5 * n);
  double fa = pa, fr = pr;  // t^{q_k} at both ends, q_k = s - n/2 - k
  for (int k = 0; k < q.series_terms; ++k) {
    const double qk = s - 0.5 * n - k;
    double term;
    if (std::abs(qk) < 1e-12)
      term = tb.b[k] * std::log(r0v / kAnchor);
    else
      term = tb.b[k] * (fr - fa) / qk;
    acc += term;
    fa /= kAnchor;
    fr /= r0v;
  }
  return acc;
}

double norm2(std::span<const double> v) {
  double a = 0.0;
  for (double x : v) a += x * x;
  return a;
}

}  // namespace

double r0(std::span<const double> x, std::span<const double> z) {
  if (x.size() != z.size()) throw std::invalid_argument("r0: dimension mismatch");
  double d2 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) d2 += (z[i] - x[i]) * (z[i] - x[i]);
  if (d2 == 0.0) throw std::invalid_argument("r0: coincident points");
  return (1.0 - norm2(x)) * (1.0 - norm2(z)) / d2;
}

double green_radial_integral(int n, double s, double r0v, const QuadratureConfig& q) {
  return green_tint(n, s, r0v, q);
}

double green_quadrature_reference(int n, double s, double r0v, const QuadratureConfig& q) {
  if (!(r0v > 0.0)) return 0.0;
  if (q.endpoint_map == QuadratureConfig::EndpointMap::squared) {
    // t = u^2: 2 int_0^{sqrt(r0)} u^{2s-1} (1+u^2)^{-n/2} du
    return 2.0 * integrate_graded(
                     [&](double u) {
                       return std::pow(u, 2.0 * s - 1.0) * std::pow(1.0 + u * u, -0.5 * n);
                     },
                     0.0, std::sqrt(r0v), {}, q);
  }
  // t = u^{1/s}: (1/s) int_0^{r0^s} (1 + u^{1/s})^{-n/2} du
  return integrate_graded(
             [&](double u) { return std::pow(1.0 + std::pow(u, 1.0 / s), -0.5 * n); }, 0.0,
             std::pow(r0v, s), {}, q) /
         s;
}

double green_series_coefficient(int n, double s, int k) {
  if (k < 0) throw std::invalid_argument("series coefficient index must be >= 0");
  const Tables& tb = tables(n, s, k + 1);
  if (k < static_cast<int>(tb.c.size())) return tb.c[k];
  double b = 1.0;
  for (int j = 0; j < k; ++j) b *= (-0.5 * n - j) / (j + 1.0);
  return b / (k + s);
}

double green_value(const GreenKernel& k, std::span<const double> x, std::span<const double> z) {
  double d2 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) d2 += (z[i] - x[i]) * (z[i] - x[i]);
  if (d2 == 0.0) throw std::invalid_argument("green kernel: coincident points");
  const double one_x = 1.0 - norm2(x), one_z = 1.0 - norm2(z);
  if (one_x <= 0.0 || one_z <= 0.0) return 0.0;  // continuous extension
  const double r0v = one_x * one_z / d2;
  const double pref = std::pow(d2, 0.5 * (2.0 * k.s - k.n));
  return pref * green_tint(k.n, k.s, r0v, k.quad);
}

SeriesSplit green_series_split(const GreenKernel& k, std::span<const double> x,
                               std::span<const double> z) {
  double d2 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) d2 += (z[i] - x[i]) * (z[i] - x[i]);
  if (d2 == 0.0) throw std::invalid_argument("green kernel: coincident points");
  const double one_x = 1.0 - norm2(x), one_z = 1.0 - norm2(z);
  SeriesSplit out;
  if (one_x <= 0.0 || one_z <= 0.0) return out;
  const double r0v = one_x * one_z / d2;
  const double r1 = std::min(r0v, kSeriesEdge);
  const double pref = std::pow(d2, 0.5 * (2.0 * k.s - k.n));
  const Tables& tb = tables(k.n, k.s, k.quad.series_terms);

  out.g0 = pref * std::pow(r1, k.s) / k.s;
  out.g1 = pref * (series_value(tb, k.s, r1, k.quad.series_terms) - std::pow(r1, k.s) / k.s);
  if (r0v > r1) out.tail = pref * (green_tint(k.n, k.s, r0v, k.quad) - tb.t_half);
  return out;
}

double boundary_functional(const GreenKernel& k, const ScalarField& f, std::span<const double> e,
                           std::span<const double> omega) {
  const int n = k.n;
  const double s = k.s;
  if (static_cast<int>(e.size()) != n || static_cast<int>(omega.size()) != n || f.dim != n)
    throw std::invalid_argument("boundary functional: dimension mismatch");
  if (std::abs(norm2(e) - 1.0) > 1e-12)
    throw std::invalid_argument("boundary functional: e must lie on the unit sphere");
  double ew = 0.0;
  for (int i = 0; i < n; ++i) ew += e[i] * omega[i];
  if (!(ew < 0.0))
    throw std::invalid_argument("boundary functional: direction must point inward (e.w < 0)");
  const double front = std::pow(-2.0 * ew, s);

  if (n == 1) {
    // z = e(1-rho): I = front/s int_0^2 f(e(1-rho)) rho^{s-1} (2-rho)^s drho,
    // then rho = q^{1/s} absorbs the radial factor exactly.
    const double e0 = e[0];
    const double base[1] = {e0};
    const double step[1] = {-e0};
    std::vector<double> kq;  // kink radii mapped into q
    {
      std::vector<double> kr = f.ray_kinks
                                   ? f.ray_kinks(std::span<const double>(base, 1),
                                                 std::span<const double>(step, 1))
                                   : sphere_crossings(std::span<const double>(base, 1),
                                                      std::span<const double>(step, 1),
                                                      f.support_radius);
      for (double r : kr)
        if (r > 0.0 && r < 2.0) kq.push_back(std::pow(r, s));
    }
    std::sort(kq.begin(), kq.end());
    const double inner = integrate_graded(
        [&](double q) {
          const double rho = std::pow(q, 1.0 / s);
          const double zz = e0 * (1.0 - rho);
          const double pt[1] = {zz};
          return f.eval(std::span<const double>(pt, 1)) * std::pow(2.0 - rho, s);
        },
        0.0, std::pow(2.0, s), kq, k.quad);
    return front / (s * s) * inner;
  }

  if (n != 2) throw std::invalid_argument("boundary functional: n must be 1 or 2");
  // polar around e: z = e + rho theta(alpha), theta = cos(a)(-e) + sin(a) e_perp,
  // chord rho_max = 2 cos a; 1-|z|^2 = rho (2cos a - rho).
  const double ex = e[0], ey = e[1];
  const double px = -ey, py = ex;  // e_perp
  auto inner_alpha = [&](double a) {
    const double ca = std::cos(a), sa = std::sin(a);
    const double tx = -ex * ca + px * sa, ty = -ey * ca + py * sa;
    const double rho_max = 2.0 * ca;
    if (!(rho_max > 0.0)) return 0.0;
    // rho = q^{1/s} once more
    return integrate_graded(
               [&](double q) {
                 const double rho = std::pow(q, 1.0 / s);
                 const double pt[2] = {ex + rho * tx, ey + rho * ty};
                 return f.eval(std::span<const double>(pt, 2)) * std::pow(rho_max - rho, s);
               },
               0.0, std::pow(rho_max, s), {}, k.quad) /
           s;
  };
  QuadratureConfig qa = k.quad;
  qa.grading_levels = 12;
  const double outer = integrate_graded([&](double a) { return inner_alpha(a); }, -0.5 * M_PI,
                                        0.5 * M_PI, {}, qa);
  return front / s * outer;
}

double green_pairing(const GreenKernel& k, const ScalarField& f, std::span<const double> x) {
  const int n = k.n;
  if (static_cast<int>(x.size()) != n || f.dim != n)
    throw std::invalid_argument("green pairing: dimension mismatch");
  if (n == 1) {
    const double x0 = x[0];
    std::vector<double> breaks = {x0};
    // panel splits where f loses smoothness along the segment
    for (double sgn : {1.0, -1.0}) {
      const double base[1] = {x0};
      const double step[1] = {sgn};
      std::vector<double> kr = f.ray_kinks
                                   ? f.ray_kinks(std::span<const double>(base, 1),
                                                 std::span<const double>(step, 1))
                                   : sphere_crossings(std::span<const double>(base, 1),
                                                      std::span<const double>(step, 1),
                                                      f.support_radius);
      for (double r : kr) breaks.push_back(x0 + sgn * r);
    }
    return integrate_graded(
        [&](double z) {
          const double zz[1] = {z};
          const double fv = f.eval(std::span<const double>(zz, 1));
          if (fv == 0.0) return 0.0;
          return fv * green_value(k, x, std::span<const double>(zz, 1));
        },
        -1.0, 1.0, breaks, k.quad);
  }
  if (n != 2) throw std::invalid_argument("green pairing: n must be 1 or 2");
  // polar around x out to the unit sphere; G * rho ~ rho^{2s-1} near 0
  const int na = std::max(16, k.quad.angular_nodes);
  double acc = 0.0;
  for (int a = 0; a < na; ++a) {
    const double th = 2.0 * M_PI * (a + 0.5) / na;
    const double tx = std::cos(th), ty = std::sin(th);
    const double base[2] = {x[0], x[1]};
    const double step[2] = {tx, ty};
    const std::vector<double> cross =
        sphere_crossings(std::span<const double>(base, 2), std::span<const double>(step, 2), 1.0);
    if (cross.empty()) continue;
    const double rho_max = cross.back();
    std::vector<double> breaks;
    std::vector<double> kr = f.ray_kinks
                                 ? f.ray_kinks(std::span<const double>(base, 2),
                                               std::span<const double>(step, 2))
                                 : sphere_crossings(std::span<const double>(base, 2),
                                                    std::span<const double>(step, 2),
                                                    f.support_radius);
    for (double r : kr)
      if (r < rho_max) breaks.push_back(r);
    acc += (2.0 * M_PI / na) *
           integrate_graded(
               [&](double rho) {
                 const double zz[2] = {x[0] + rho * tx, x[1] + rho * ty};
                 const double fv = f.eval(std::span<const double>(zz, 2));
                 if (fv == 0.0) return 0.0;
                 return fv * green_value(k, x, std::span<const double>(zz, 2)) * rho;
               },
               0.0, rho_max, breaks, k.quad);
  }
  return acc;
}

GoaTable verify_goa_limit(const GreenKernel& k, const ScalarField& f, std::span<const double> e,
                          std::span<const double> omega, std::span<const double> eps_values) {
  GoaTable out;
  out.rhs = boundary_functional(k, f, e, omega);
  out.degenerate = std::abs(out.rhs) < 1e-300;
  double pt[kMaxDim];
  for (double eps : eps_values) {
    GoaRow row;
    row.eps = eps;
    row.rhs = out.rhs;
    for (int i = 0; i < k.n; ++i) pt[i] = e[i] + eps * omega[i];
    row.lhs = std::pow(eps, -k.s) * green_pairing(k, f, std::span<const double>(pt, k.n));
    row.ratio = out.degenerate ? 0.0 : row.lhs / row.rhs;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace fracap
