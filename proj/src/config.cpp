#include "fracap/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fracap {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& val) {
  throw std::invalid_argument("config: bad value for " + key + ": '" + val + "'");
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key in '" + line + "'");
    m[key] = val;
  }
  return m;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

double config_get(const ConfigMap& m, const std::string& key, double fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) bad_value(key, it->second);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, it->second);
  } catch (const std::out_of_range&) {
    bad_value(key, it->second);
  }
}

long config_get(const ConfigMap& m, const std::string& key, long fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  try {
    size_t pos = 0;
    long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) bad_value(key, it->second);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, it->second);
  } catch (const std::out_of_range&) {
    bad_value(key, it->second);
  }
}

int config_get(const ConfigMap& m, const std::string& key, int fallback) {
  return static_cast<int>(config_get(m, key, static_cast<long>(fallback)));
}

bool config_get(const ConfigMap& m, const std::string& key, bool fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  bad_value(key, v);
}

std::string config_get(const ConfigMap& m, const std::string& key, const std::string& fallback) {
  auto it = m.find(key);
  return it == m.end() ? fallback : it->second;
}

void apply_config(const ConfigMap& m, QuadratureConfig& q) {
  q.radial_nodes = config_get(m, "quad.radial_nodes", q.radial_nodes);
  q.angular_nodes = config_get(m, "quad.angular_nodes", q.angular_nodes);
  q.truncation_radius = config_get(m, "quad.truncation_radius", q.truncation_radius);
  q.delta_cap = config_get(m, "quad.delta_cap", q.delta_cap);
  q.grading_levels = config_get(m, "quad.grading_levels", q.grading_levels);
  q.grading_min_frac = config_get(m, "quad.grading_min_frac", q.grading_min_frac);
  q.max_evals = config_get(m, "quad.max_evals", q.max_evals);
  q.series_terms = config_get(m, "quad.series_terms", q.series_terms);
  std::string map = config_get(m, "quad.endpoint_map", std::string("pow_inv_s"));
  if (map == "pow_inv_s")
    q.endpoint_map = QuadratureConfig::EndpointMap::pow_inv_s;
  else if (map == "squared")
    q.endpoint_map = QuadratureConfig::EndpointMap::squared;
  else
    throw std::invalid_argument("config: quad.endpoint_map must be pow_inv_s or squared");
  if (q.radial_nodes < 2 || q.angular_nodes < 2 || q.grading_levels < 1 ||
      !(q.grading_min_frac > 0.0) || q.series_terms < 1 || !(q.truncation_radius > 1.0))
    throw std::invalid_argument("config: quadrature values out of range");
}

}  // namespace fracap
