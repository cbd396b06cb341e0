#ifndef FRACAP_INTERP_HPP
#define FRACAP_INTERP_HPP

#include <optional>
#include <vector>

namespace fracap {

/// Monotone cubic interpolant (Fritsch-Carlson slope limiting). C^1 globally,
/// piecewise cubic; derivatives up to order 3 evaluate the local cubic.
class PchipCurve {
 public:
  PchipCurve() = default;
  /// Strictly increasing xs. Optional pinned endpoint slopes (e.g. zero slope
  /// at r=0 for even radial profiles).
  PchipCurve(std::vector<double> xs, std::vector<double> ys,
             std::optional<double> left_slope = std::nullopt,
             std::optional<double> right_slope = std::nullopt);

  double operator()(double x) const { return deriv(x, 0); }
  /// order in {0,1,2,3}; outside [x_front, x_back] the curve extends with the
  /// boundary cubic (callers clamp when they want compact support)
  double deriv(double x, int order) const;

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  const std::vector<double>& slopes() const { return d_; }
  bool empty() const { return xs_.empty(); }

 private:
  std::vector<double> xs_, ys_, d_;
  int interval(double x) const;
};

}  // namespace fracap

#endif
