#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "maxbayes/errors.hpp"

namespace maxbayes::experiments {

namespace report_detail {

inline std::string fixed(const nlohmann::json& v, int digits) {
  if (!v.is_number()) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v.get<double>());
  return buf;
}

}  // namespace report_detail

/// Markdown tables built from results.json: scaled RMSEs laid out cell by estimator, coverage and Bayes factors.
inline std::string report(const std::filesystem::path& dir) {
  std::ifstream in(dir / "results.json");
  if (!in) throw ConfigError("report: no results.json in " + dir.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("report: malformed results.json");
  using report_detail::fixed;
  std::ostringstream out;
  out << "# " << j.value("name", std::string("experiment")) << " (" << j.value("kind", std::string("?")) << ")\n\n";
  out << "jobs " << j.value("completed", 0) << "/" << j.value("jobs", 0) << " completed, " << j.value("failed", 0) << " failed\n\n";
  if (!j["rmse"].empty()) {
    out << "| cell | estimator | param | n | RMSE (scaled) | bias | MC se |\n|---|---|---|---|---|---|---|\n";
    for (const auto& r : j["rmse"])
      out << "| " << r["cell"].get<std::string>() << " | " << r["estimator"].get<std::string>() << " | " << r["param"].get<std::string>()
          << " | " << r["n"].get<int>() << " | " << fixed(r["scaled"], 0) << " | " << fixed(r["bias"], 4) << " | " << fixed(r["mc_se"], 4)
          << " |\n";
    out << "\nRMSE columns are multiplied by 1e4 for dependence parameters and 1e3 for margin parameters.\n\n";
  }
  if (!j["coverage"].empty()) {
    out << "| cell | estimator | param | n | coverage | MC se |\n|---|---|---|---|---|---|\n";
    for (const auto& r : j["coverage"])
      out << "| " << r["cell"].get<std::string>() << " | " << r["estimator"].get<std::string>() << " | " << r["param"].get<std::string>()
          << " | " << r["n"].get<int>() << " | " << fixed(r["coverage"], 3) << " | " << fixed(r["mc_se"], 3) << " |\n";
    out << '\n';
  }
  if (j.contains("bayes_factors") && !j["bayes_factors"].empty()) {
    out << "| cell | estimator | n | median B12 | lower bounds | upper bounds |\n|---|---|---|---|---|---|\n";
    for (const auto& r : j["bayes_factors"])
      out << "| " << r["cell"].get<std::string>() << " | " << r["estimator"].get<std::string>() << " | " << r["n"].get<int>() << " | "
          << fixed(r["median_b12"], 3) << " | " << r["lower_bounds"].get<int>() << " | " << r["upper_bounds"].get<int>() << " |\n";
    out << '\n';
  }
  if (!j["failures"].empty()) {
    out << "## Failures\n\n";
    for (const auto& f : j["failures"]) out << "- " << f.dump() << '\n';
  }
  return out.str();
}

}  // namespace maxbayes::experiments
