#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "maxbayes/errors.hpp"
#include "maxbayes/inference/chain.hpp"
#include "maxbayes/inference/summary.hpp"
#include "maxbayes/simulate/dataset.hpp"

namespace maxbayes::inference {

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

/// CSV `iter,<params>,mean_blocks,accepted` plus a JSON sidecar with run metadata.
inline void write_trace(const std::filesystem::path& csv, const Trace& trace) {
  std::ofstream out(csv);
  if (!out) throw ConfigError("cannot write " + csv.string());
  out << "iter";
  for (const auto& n : trace.names) out << ',' << n;
  out << ",mean_blocks,accepted\n";
  for (int t = 0; t < trace.size(); ++t) {
    out << t + 1;
    for (double v : trace.theta[static_cast<std::size_t>(t)]) out << ',' << simulate::format_double(v);
    out << ',' << simulate::format_double(trace.mean_blocks[static_cast<std::size_t>(t)]) << ','
        << trace.accepted[static_cast<std::size_t>(t)] << '\n';
  }
  nlohmann::ordered_json meta;
  meta["parameters"] = trace.names;
  meta["iterations"] = trace.size();
  meta["burn_in"] = trace.burn_in;
  meta["seed"] = trace.seed;
  meta["config_hash"] = trace.config_hash;
  meta["acceptance_rate"] = trace.acceptance_rate;
  meta["final_step"] = trace.final_step;
  meta["runtime_seconds"] = trace.runtime_seconds;
  std::ofstream side(sidecar_path(csv));
  side << meta.dump(2) << '\n';
}

/// Reads a trace CSV; the sidecar supplies burn-in and seed when present.
inline Trace read_trace(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw ConfigError("cannot read " + csv.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trace: empty file " + csv.string());
  const auto header = simulate::split_csv_line(line);
  if (header.size() < 4 || header.front() != "iter" || header[header.size() - 2] != "mean_blocks" || header.back() != "accepted")
    throw ConfigError("trace: malformed header in " + csv.string());
  Trace t;
  t.names.assign(header.begin() + 1, header.end() - 2);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = simulate::split_csv_line(line);
    if (f.size() != header.size()) throw ConfigError("trace: wrong field count in " + csv.string());
    std::vector<double> row;
    for (std::size_t p = 1; p + 2 < f.size(); ++p) row.push_back(simulate::parse_double(f[p]));
    t.theta.push_back(std::move(row));
    t.mean_blocks.push_back(simulate::parse_double(f[f.size() - 2]));
    t.accepted.push_back(static_cast<int>(simulate::parse_double(f.back())));
  }
  if (t.theta.empty()) throw ConfigError("trace: no rows in " + csv.string());
  const auto side = sidecar_path(csv);
  if (std::filesystem::exists(side)) {
    std::ifstream sin(side);
    const auto meta = nlohmann::json::parse(sin, nullptr, false);
    if (meta.is_discarded()) throw ConfigError("trace: malformed sidecar " + side.string());
    t.burn_in = meta.value("burn_in", 0);
    t.seed = meta.value("seed", std::uint64_t{0});
    t.config_hash = meta.value("config_hash", std::string());
  }
  if (t.burn_in >= t.size()) throw ConfigError("trace: burn-in covers the whole trace");
  return t;
}

inline nlohmann::ordered_json summary_json(const PosteriorSummary& s) {
  nlohmann::ordered_json j;
  j["level"] = s.level;
  j["mean_blocks"] = s.mean_blocks;
  for (const auto& p : s.parameters) {
    nlohmann::ordered_json q;
    q["median"] = p.median;
    q["mean"] = p.mean;
    q["sd"] = p.sd;
    q["lower"] = p.lower;
    q["upper"] = p.upper;
    q["mc_se"] = p.mc_se;
    q["mc_se_median"] = p.mc_se_median;
    nlohmann::ordered_json acf;
    for (const auto& [lag, v] : p.acf) acf[std::to_string(lag)] = v;
    q["acf"] = acf;
    j["parameters"][p.name] = q;
  }
  return j;
}

}  // namespace maxbayes::inference
