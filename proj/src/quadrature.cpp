#include "fracap/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace fracap {

namespace {

// Newton iteration on Legendre polynomials; standard construction, cached.
std::pair<std::vector<double>, std::vector<double>> make_gl(int n) {
  if (n < 1) throw std::invalid_argument("gauss-legendre: need n >= 1");
  std::vector<double> x(n), w(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
  return {std::move(x), std::move(w)};
}

std::map<int, std::pair<std::vector<double>, std::vector<double>>> g_gl_cache;
std::mutex g_gl_mutex;

const std::pair<std::vector<double>, std::vector<double>>& gl_rule(int n) {
  std::lock_guard<std::mutex> lock(g_gl_mutex);
  auto it = g_gl_cache.find(n);
  if (it == g_gl_cache.end()) it = g_gl_cache.emplace(n, make_gl(n)).first;
  return it->second;
}

}  // namespace

const std::vector<double>& gl_nodes(int n) { return gl_rule(n).first; }
const std::vector<double>& gl_weights(int n) { return gl_rule(n).second; }

std::vector<double> graded_mesh(double a, double b, std::span<const double> interior_breaks,
                                bool grade_left, bool grade_right, int levels, double min_frac) {
  // collect cut positions strictly inside (a, b)
  std::vector<double> cuts;
  cuts.push_back(a);
  cuts.push_back(b);
  for (double c : interior_breaks)
    if (c > a && c < b) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [&](double u, double v) { return std::abs(u - v) <= 1e-15 * (std::abs(u) + std::abs(v) + 1.0); }),
             cuts.end());

  std::vector<double> mesh;
  mesh.push_back(cuts.front());
  for (size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const double l = cuts[seg], r = cuts[seg + 1];
    const double len = r - l;
    if (!(len > 0)) continue;
    const bool gl = grade_left || seg > 0;          // interior cuts always graded
    const bool gr = grade_right || seg + 2 < cuts.size();
    const double mid = 0.5 * (l + r);
    // left half: geometric panels l -> mid
    if (gl) {
      double frac = std::max(min_frac, std::pow(0.5, levels));
      std::vector<double> pts;
      for (double f = frac; f < 0.999; f *= 2.0) pts.push_back(l + 0.5 * len * f);
      for (double p : pts)
        if (p > mesh.back()) mesh.push_back(p);
    }
    if (mid > mesh.back()) mesh.push_back(mid);
    // right half: geometric panels mid -> r
    if (gr) {
      double frac = std::max(min_frac, std::pow(0.5, levels));
      std::vector<double> pts;
      for (double f = frac; f < 0.999; f *= 2.0) pts.push_back(r - 0.5 * len * f);
      std::sort(pts.begin(), pts.end());
      for (double p : pts)
        if (p > mesh.back() && p < r) mesh.push_back(p);
    }
    if (r > mesh.back()) mesh.push_back(r);
  }
  return mesh;
}

}  // namespace fracap
