#include "fracap/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fracap {

PchipCurve::PchipCurve(std::vector<double> xs, std::vector<double> ys,
                       std::optional<double> left_slope, std::optional<double> right_slope)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  const size_t n = xs_.size();
  if (n != ys_.size() || n < 2) throw std::invalid_argument("pchip: need >= 2 matching nodes");
  for (size_t i = 0; i + 1 < n; ++i)
    if (!(xs_[i + 1] > xs_[i])) throw std::invalid_argument("pchip: xs must increase strictly");

  std::vector<double> h(n - 1), del(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = xs_[i + 1] - xs_[i];
    del[i] = (ys_[i + 1] - ys_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  for (size_t i = 1; i + 1 < n; ++i) {
    if (del[i - 1] * del[i] > 0.0) {
      const double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
    }
  }
  auto edge = [&](double h0, double h1, double d0, double d1) {
    // one-sided three-point estimate with the usual monotonicity clamps
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0)
      d = 0.0;
    else if (d0 * d1 < 0.0 && std::abs(d) > 3.0 * std::abs(d0))
      d = 3.0 * d0;
    return d;
  };
  d_.front() = left_slope ? *left_slope : (n == 2 ? del[0] : edge(h[0], h[1], del[0], del[1]));
  d_.back() = right_slope ? *right_slope
                          : (n == 2 ? del[0] : edge(h[n - 2], h[n - 3], del[n - 2], del[n - 3]));
}

int PchipCurve::interval(double x) const {
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  int i = static_cast<int>(it - xs_.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(xs_.size()) - 2);
}

double PchipCurve::deriv(double x, int order) const {
  const int i = interval(x);
  const double h = xs_[i + 1] - xs_[i];
  const double t = x - xs_[i];
  const double del = (ys_[i + 1] - ys_[i]) / h;
  // cubic in Hermite form: y_i + d_i t + c2 t^2 + c3 t^3
  const double c2 = (3.0 * del - 2.0 * d_[i] - d_[i + 1]) / h;
  const double c3 = (d_[i] + d_[i + 1] - 2.0 * del) / (h * h);
  switch (order) {
    case 0: return ys_[i] + t * (d_[i] + t * (c2 + t * c3));
    case 1: return d_[i] + t * (2.0 * c2 + t * 3.0 * c3);
    case 2: return 2.0 * c2 + 6.0 * c3 * t;
    case 3: return 6.0 * c3;
    default: return 0.0;  // cubic: higher derivatives vanish
  }
}

}  // namespace fracap
