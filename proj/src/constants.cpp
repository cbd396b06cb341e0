#include "fracap/constants.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>

namespace fracap {

namespace {

// Lanczos g=7, n=9 (Godfrey); classic published set.
constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

double gamma_positive(double z) {
  // valid for z >= 0.5
  double a = kLanczos[0];
  for (int k = 1; k < 9; ++k) a += kLanczos[k] / (z + k - 1.0);
  const double t = z + 6.5;
  return std::sqrt(2.0 * M_PI) * std::pow(t, z - 0.5) * std::exp(-t) * a;
}

struct Key {
  int n;
  std::int64_t sbits;
  bool operator<(const Key& o) const { return n != o.n ? n < o.n : sbits < o.sbits; }
};

std::int64_t bits(double s) {
  std::int64_t b;
  static_assert(sizeof(b) == sizeof(s));
  __builtin_memcpy(&b, &s, sizeof(b));
  return b;
}

std::map<Key, double> g_cn_cache, g_kn_cache;
std::mutex g_cache_mutex;

void check_ns(int n, double s) {
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("order s must lie in (0, 1)");
}

}  // namespace

double gamma_fn(double z) {
  if (z != z) return z;
  if (z >= 0.5) return gamma_positive(z);
  // reflection: Γ(z)Γ(1−z) = π / sin(πz); also covers z in (0, 0.5)
  const double spz = std::sin(M_PI * z);
  if (spz == 0.0) throw std::domain_error("gamma_fn: pole at nonpositive integer");
  return M_PI / (spz * gamma_positive(1.0 - z));
}

double normalization_constant(int n, double s) {
  check_ns(n, s);
  const Key key{n, bits(s)};
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto it = g_cn_cache.find(key);
  if (it != g_cn_cache.end()) return it->second;
  const double v = std::pow(4.0, s) * s * gamma_fn(0.5 * n + s) /
                   (std::pow(M_PI, 0.5 * n) * gamma_fn(1.0 - s));
  g_cn_cache.emplace(key, v);
  return v;
}

double green_constant(int n, double s) {
  check_ns(n, s);
  const Key key{n, bits(s)};
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto it = g_kn_cache.find(key);
  if (it != g_kn_cache.end()) return it->second;
  const double g = gamma_fn(s);
  const double v = gamma_fn(0.5 * n) / (std::pow(4.0, s) * std::pow(M_PI, 0.5 * n) * g * g);
  g_kn_cache.emplace(key, v);
  return v;
}

double sphere_measure(int n) {
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  return 2.0 * std::pow(M_PI, 0.5 * n) / gamma_fn(0.5 * n);
}

}  // namespace fracap
