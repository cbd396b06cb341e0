#ifndef FRACAP_CSV_HPP
#define FRACAP_CSV_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fracap {

/// Numeric results table. Serialized as '#'-prefixed comment lines, a digest
/// line covering the data section, the header row, then %.17g cells, so a
/// rerun with identical inputs produces a byte-identical file (timings and
/// other volatile run facts belong in the side manifest, never here).
struct CsvTable {
  std::vector<std::string> comments;  ///< emitted as '# ...' (no volatile data)
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::uint64_t fnv1a(std::string_view bytes);
std::string format_g17(double v);

std::string csv_serialize(const CsvTable& t);           // includes digest line
std::uint64_t csv_digest(const CsvTable& t);            // FNV-1a of data section
void csv_write(const CsvTable& t, const std::string& path);

/// Volatile facts about a run (wall clock, evaluation counts, the digest of
/// the CSV it accompanies), serialized as JSON next to the data file.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> params;
  double wall_ms = 0.0;
  long evals = 0;
  std::string csv_digest_hex;

  std::string serialize() const;
  void write(const std::string& path) const;
};

}  // namespace fracap

#endif
