#include "fracap/field.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace fracap {

double ScalarField::dist_to_smooth_edge(std::span<const double> x) const {
  double d2 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double c = smooth_center.empty() ? 0.0 : smooth_center[i];
    d2 += (x[i] - c) * (x[i] - c);
  }
  return smooth_radius - std::sqrt(d2);
}

std::vector<double> sphere_crossings(std::span<const double> base, std::span<const double> step,
                                     double radius) {
  double bb = 0.0, bs = 0.0;
  for (size_t i = 0; i < base.size(); ++i) {
    bb += base[i] * base[i];
    bs += base[i] * step[i];
  }
  const double disc = bs * bs - (bb - radius * radius);
  std::vector<double> out;
  if (disc >= 0.0) {
    const double rt = std::sqrt(disc);
    for (double t : {-bs - rt, -bs + rt})
      if (t > 0.0) out.push_back(t);
  }
  return out;
}

namespace {

// exponent chain for e^{g}: value plus g', g'', g''' assembled by Faa di Bruno
double exp_chain(double g0, double g1, double g2, double g3, int order) {
  const double e = std::exp(g0);
  switch (order) {
    case 0: return e;
    case 1: return e * g1;
    case 2: return e * (g2 + g1 * g1);
    case 3: return e * (g3 + 3.0 * g1 * g2 + g1 * g1 * g1);
    default: throw std::invalid_argument("derivative order must be <= 3");
  }
}

}  // namespace

double smoothstep_c(double t, int order) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return order == 0 ? 1.0 : 0.0;
  // h(t) = 1/(1 + e^{g}), g = 1/t - 1/(1-t); write as logistic of -g
  const double u = 1.0 - t;
  const double g0 = 1.0 / t - 1.0 / u;
  const double g1 = -1.0 / (t * t) - 1.0 / (u * u);
  const double g2 = 2.0 / (t * t * t) - 2.0 / (u * u * u);
  const double g3 = -6.0 / (t * t * t * t) - 6.0 / (u * u * u * u);
  const double eg = std::exp(g0);
  const double h = 1.0 / (1.0 + eg);
  if (order == 0) return h;
  // derivatives of h = sigma(-g): sigma' = sigma(1-sigma)
  const double s1 = h * (1.0 - h);                      // sigma'(-g)
  const double s2 = s1 * (1.0 - 2.0 * h);               // sigma''(-g)
  const double s3 = s1 * (1.0 - 6.0 * h + 6.0 * h * h); // sigma'''(-g)
  switch (order) {
    case 1: return -s1 * g1;
    case 2: return s2 * g1 * g1 - s1 * g2;
    case 3: return -s3 * g1 * g1 * g1 + 3.0 * s2 * g1 * g2 - s1 * g3;
    default: throw std::invalid_argument("derivative order must be <= 3");
  }
}

double bump_c(double y, int order) {
  const double q = 1.0 - y * y;
  if (q <= 0.0) return 0.0;
  // g(y) = 1 - 1/q; g' = -2y/q^2; higher orders by direct differentiation
  const double q2 = q * q, q3 = q2 * q, q4 = q3 * q;
  const double g0 = 1.0 - 1.0 / q;
  const double g1 = -2.0 * y / q2;
  const double g2 = -2.0 / q2 - 8.0 * y * y / q3;
  const double g3 = -24.0 * y / q3 - 48.0 * y * y * y / q4;
  return exp_chain(g0, g1, g2, g3, order);
}

ScalarField make_bump_field(int dim, std::vector<double> center, double halfwidth,
                            double amplitude) {
  if (dim < 1 || static_cast<int>(center.size()) != dim)
    throw std::invalid_argument("bump field: center size must match dim");
  if (!(halfwidth > 0.0)) throw std::invalid_argument("bump field: halfwidth must be positive");
  double cnorm = 0.0;
  for (double c : center) cnorm += c * c;
  cnorm = std::sqrt(cnorm);

  ScalarField f;
  f.dim = dim;
  f.support_radius = cnorm + halfwidth * std::sqrt(static_cast<double>(dim));
  f.smooth_radius = f.support_radius + 1.0;  // C^infinity everywhere
  f.eval = [dim, center, halfwidth, amplitude](std::span<const double> x) {
    double v = amplitude;
    for (int i = 0; i < dim; ++i) {
      v *= bump_c((x[i] - center[i]) / halfwidth);
      if (v == 0.0) return 0.0;
    }
    return v;
  };
  f.analytic_partial = [dim, center, halfwidth, amplitude](std::span<const double> x, int axis,
                                                           int order) {
    double v = amplitude;
    for (int i = 0; i < dim; ++i) {
      const double y = (x[i] - center[i]) / halfwidth;
      if (i == axis)
        v *= bump_c(y, order) / std::pow(halfwidth, order);
      else
        v *= bump_c(y);
    }
    return v;
  };
  return f;
}

ScalarField make_ms_profile(int n, double s, double smooth_radius) {
  ScalarField f;
  f.dim = n;
  f.support_radius = 1.0;
  f.smooth_radius = smooth_radius;
  f.eval = [n, s](std::span<const double> x) {
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += x[i] * x[i];
    const double q = 1.0 - r2;
    return q > 0.0 ? std::pow(q, s) : 0.0;
  };
  return f;
}

ScalarField make_radial_field(int n, std::function<double(double)> profile, double radius,
                              double smooth_radius) {
  ScalarField f;
  f.dim = n;
  f.support_radius = radius;
  f.smooth_radius = smooth_radius;
  f.eval = [n, radius, profile = std::move(profile)](std::span<const double> x) {
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += x[i] * x[i];
    const double r = std::sqrt(r2);
    return r < radius ? profile(r) : 0.0;
  };
  return f;
}

double TestFunction::deriv(double x, int order) const {
  const double y = (x - center) / halfwidth;
  return amplitude * bump_c(y, order) / std::pow(halfwidth, order);
}

double radial_mixed_partial(const std::function<double(double, int)>& P,
                            std::span<const double> y, std::span<const int> orders) {
  const int dim = static_cast<int>(y.size());
  if (static_cast<int>(orders.size()) != dim)
    throw std::invalid_argument("radial_mixed_partial: order/point dimension mismatch");
  double r2 = 0.0;
  for (double v : y) r2 += v * v;
  const double r = std::sqrt(r2);
  int total = 0;
  for (int o : orders) {
    if (o < 0) throw std::invalid_argument("radial_mixed_partial: negative order");
    total += o;
  }
  if (total == 0) return P(r, 0);
  if (r < 1e-8)
    throw std::domain_error("radial_mixed_partial: base point too close to the center");

  struct Term {
    double c;
    std::array<int, 4> p;
    int q, d;
  };
  if (dim > 4) throw std::invalid_argument("radial_mixed_partial: dimension capped at 4");
  std::vector<Term> terms{{1.0, {0, 0, 0, 0}, 0, 0}};
  std::vector<Term> next;
  auto push = [&next](double c, const std::array<int, 4>& p, int q, int d) {
    for (Term& t : next)
      if (t.q == q && t.d == d && t.p == p) {
        t.c += c;
        return;
      }
    next.push_back({c, p, q, d});
  };
  for (int axis = 0; axis < dim; ++axis) {
    for (int rep = 0; rep < orders[axis]; ++rep) {
      next.clear();
      for (const Term& t : terms) {
        // d/dy_axis of c y^p r^{-q} P^{(d)}:
        if (t.p[axis] > 0) {
          auto p = t.p;
          --p[axis];
          push(t.c * t.p[axis], p, t.q, t.d);
        }
        auto p = t.p;
        ++p[axis];
        if (t.q != 0) push(-t.c * t.q, p, t.q + 2, t.d);
        push(t.c, p, t.q + 1, t.d + 1);
      }
      terms = next;
    }
  }
  double out = 0.0;
  for (const Term& t : terms) {
    double v = t.c * P(r, t.d) * std::pow(r, -t.q);
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < t.p[i]; ++k) v *= y[i];
    out += v;
  }
  return out;
}

}  // namespace fracap
