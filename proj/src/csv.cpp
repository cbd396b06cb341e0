#include "fracap/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fracap {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string data_section(const CsvTable& t) {
  std::ostringstream out;
  for (size_t i = 0; i < t.header.size(); ++i) {
    if (i) out << ',';
    out << t.header[i];
  }
  out << '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size())
      throw std::invalid_argument("csv: row width does not match header");
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_g17(row[i]);
    }
    out << '\n';
  }
  return out.str();
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::uint64_t csv_digest(const CsvTable& t) { return fnv1a(data_section(t)); }

std::string csv_serialize(const CsvTable& t) {
  std::string data = data_section(t);
  std::ostringstream out;
  out << "# fracap-csv v1\n";
  out << "# digest=" << hex16(fnv1a(data)) << '\n';
  for (const auto& c : t.comments) out << "# " << c << '\n';
  out << data;
  return out.str();
}

void csv_write(const CsvTable& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("csv: cannot write " + path);
  out << csv_serialize(t);
}

std::string RunManifest::serialize() const {
  nlohmann::json j;
  j["command"] = command;
  j["params"] = params;
  j["wall_ms"] = wall_ms;
  j["evals"] = evals;
  j["csv_digest"] = csv_digest_hex;
  return j.dump(2) + "\n";
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("manifest: cannot write " + path);
  out << serialize();
}

}  // namespace fracap
