#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "maxbayes/errors.hpp"
#include "maxbayes/partition.hpp"

namespace maxbayes::simulate {

enum class MarginScale { unit_frechet, gev };

/// N x k observations plus an optional partition per observation.
struct Dataset {
  int k = 0;
  std::vector<std::vector<double>> obs;
  MarginScale scale = MarginScale::unit_frechet;
  std::optional<std::vector<Partition>> partitions;

  int size() const noexcept { return static_cast<int>(obs.size()); }
};

/// Shortest round-trip decimal form.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("csv: malformed number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::filesystem::path partition_path(const std::filesystem::path& data) {
  auto p = data;
  p.replace_extension(".partitions.csv");
  return p;
}

/// Writes `rep,obs,comp_1..comp_k` (1-based rep and obs) and, when any replicate
/// carries partitions, the sibling file `<stem>.partitions.csv` with `rep,obs,partition`.
inline void write_datasets_csv(const std::filesystem::path& path, const std::vector<Dataset>& reps) {
  if (reps.empty()) throw DomainError("write_datasets_csv: nothing to write");
  const int k = reps.front().k;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "rep,obs";
  for (int i = 1; i <= k; ++i) out << ",comp_" << i;
  out << '\n';
  bool any_partitions = false;
  for (std::size_t r = 0; r < reps.size(); ++r) {
    if (reps[r].k != k) throw DomainError("write_datasets_csv: replicates differ in dimension");
    any_partitions = any_partitions || reps[r].partitions.has_value();
    for (std::size_t l = 0; l < reps[r].obs.size(); ++l) {
      out << r + 1 << ',' << l + 1;
      for (double x : reps[r].obs[l]) out << ',' << format_double(x);
      out << '\n';
    }
  }
  if (!any_partitions) return;
  std::ofstream part(partition_path(path));
  part << "rep,obs,partition\n";
  for (std::size_t r = 0; r < reps.size(); ++r) {
    if (!reps[r].partitions) continue;
    const auto& ps = *reps[r].partitions;
    for (std::size_t l = 0; l < ps.size(); ++l) part << r + 1 << ',' << l + 1 << ',' << ps[l].to_string() << '\n';
  }
}

/// Reads a file written by write_datasets_csv, picking up the partition sibling when present.
inline std::vector<Dataset> read_datasets_csv(const std::filesystem::path& path,
                                              MarginScale scale = MarginScale::unit_frechet) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: empty file " + path.string());
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "rep" || header[1] != "obs") throw ConfigError("csv: bad header");
  const int k = static_cast<int>(header.size()) - 2;
  for (int i = 0; i < k; ++i)
    if (header[static_cast<std::size_t>(i) + 2] != "comp_" + std::to_string(i + 1)) throw ConfigError("csv: bad header");
  std::vector<Dataset> reps;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (static_cast<int>(f.size()) != k + 2) throw ConfigError("csv: wrong field count");
    const auto r = static_cast<std::size_t>(std::stoul(f[0]));
    const auto l = static_cast<std::size_t>(std::stoul(f[1]));
    if (r < 1 || l < 1) throw ConfigError("csv: rep and obs are 1-based");
    if (reps.size() < r) reps.resize(r, Dataset{k, {}, scale, std::nullopt});
    auto& d = reps[r - 1];
    if (d.obs.size() + 1 != l) throw ConfigError("csv: observations out of order");
    std::vector<double> row;
    for (int i = 0; i < k; ++i) row.push_back(parse_double(f[static_cast<std::size_t>(i) + 2]));
    d.obs.push_back(std::move(row));
  }
  const auto ppath = partition_path(path);
  if (std::filesystem::exists(ppath)) {
    std::ifstream pin(ppath);
    std::getline(pin, line);
    while (std::getline(pin, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      const auto comma2 = line.find(',', comma + 1);
      const auto r = static_cast<std::size_t>(std::stoul(line.substr(0, comma)));
      const auto l = static_cast<std::size_t>(std::stoul(line.substr(comma + 1, comma2 - comma - 1)));
      if (r < 1 || r > reps.size()) throw ConfigError("partitions: replicate out of range");
      auto& d = reps[r - 1];
      if (!d.partitions) d.partitions.emplace();
      if (d.partitions->size() + 1 != l) throw ConfigError("partitions: observations out of order");
      auto p = Partition::parse(line.substr(comma2 + 1));
      if (p.universe() != Partition::full(k)) throw ConfigError("partitions: wrong ground set");
      d.partitions->push_back(std::move(p));
    }
  }
  return reps;
}

}  // namespace maxbayes::simulate
