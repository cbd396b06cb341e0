#ifndef FRACAP_CONFIG_HPP
#define FRACAP_CONFIG_HPP

#include <map>
#include <string>

#include "fracap/quadrature.hpp"

namespace fracap {

/// Flat key=value configuration ('#' comments, blank lines ignored).
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);  // throws on unreadable file

double config_get(const ConfigMap& m, const std::string& key, double fallback);
long config_get(const ConfigMap& m, const std::string& key, long fallback);
int config_get(const ConfigMap& m, const std::string& key, int fallback);
bool config_get(const ConfigMap& m, const std::string& key, bool fallback);
std::string config_get(const ConfigMap& m, const std::string& key, const std::string& fallback);

/// Applies the quad.* keys (quad.radial_nodes, quad.angular_nodes,
/// quad.truncation_radius, quad.delta_cap, quad.grading_levels,
/// quad.grading_min_frac, quad.max_evals, quad.series_terms,
/// quad.endpoint_map=pow_inv_s|squared). Unknown keys are left for other
/// consumers; malformed values throw.
void apply_config(const ConfigMap& m, QuadratureConfig& q);

}  // namespace fracap

#endif
