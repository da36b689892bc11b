#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "maxbayes/errors.hpp"
#include "maxbayes/inference/chain.hpp"
#include "maxbayes/inference/summary.hpp"
#include "maxbayes/inference/trace_io.hpp"
#include "maxbayes/simulate/dataset.hpp"

namespace maxbayes::experiments {

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<long> counts;
  std::vector<double> density;
};

/// Equal-width histogram; a constant sample occupies a single unit-width bin.
inline Histogram histogram(const std::vector<double>& x, int bins) {
  if (x.empty()) throw DomainError("histogram: empty sample");
  if (bins < 1) throw DomainError("histogram: need at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it, hi = *hi_it;
  Histogram h;
  const auto n = static_cast<double>(x.size());
  if (lo == hi) {
    h.edges = {lo - 0.5, lo + 0.5};
    h.counts = {static_cast<long>(x.size())};
    h.density = {1.0};
    return h;
  }
  const double w = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(lo + b * w);
  h.edges.back() = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : x) {
    auto b = static_cast<std::size_t>((v - lo) / w);
    if (b >= h.counts.size()) b = h.counts.size() - 1;
    ++h.counts[b];
  }
  for (long c : h.counts) h.density.push_back(static_cast<double>(c) / (n * w));
  return h;
}

using inference::silverman_bandwidth;

struct DensityCurve {
  double bandwidth = 0.0;
  std::vector<double> grid, density;
};

/// Gaussian kernel density on an evenly spaced grid covering the sample plus three bandwidths.
inline DensityCurve kernel_density(const std::vector<double>& x, int points = 200) {
  if (x.empty()) throw DomainError("kernel_density: empty sample");
  DensityCurve out;
  out.bandwidth = silverman_bandwidth(x);
  if (!(out.bandwidth > 0.0)) return out;  // degenerate sample: the histogram carries it
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it - 3.0 * out.bandwidth, hi = *hi_it + 3.0 * out.bandwidth;
  const double norm = 1.0 / (static_cast<double>(x.size()) * out.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (int g = 0; g < points; ++g) {
    const double t = lo + (hi - lo) * g / (points - 1);
    double s = 0.0;
    for (double v : x) {
      const double u = (t - v) / out.bandwidth;
      s += std::exp(-0.5 * u * u);
    }
    out.grid.push_back(t);
    out.density.push_back(s * norm);
  }
  return out;
}

inline std::vector<double> acf_series(const std::vector<double>& x, int max_lag) {
  std::vector<double> out;
  for (int lag = 0; lag <= max_lag && static_cast<std::size_t>(lag) < x.size(); ++lag) out.push_back(inference::autocorrelation(x, lag));
  return out;
}

struct ReplicationCheck {
  std::string param;
  std::string first, second;
  double median_a = 0.0, median_b = 0.0, combined_se = 0.0;
  bool pass = false;
};

/// Two chains of one model with different seeds: posterior medians must agree within 2 combined MC errors.
inline ReplicationCheck replication_check(const inference::Trace& a, const inference::Trace& b, const std::string& param) {
  const auto xa = a.kept(a.index_of(param)), xb = b.kept(b.index_of(param));
  if (xa.empty() || xb.empty()) throw DomainError("replication_check: no post-burn-in draws");
  ReplicationCheck r;
  r.param = param;
  r.median_a = inference::median(xa);
  r.median_b = inference::median(xb);
  r.combined_se = std::hypot(inference::mcse_median(xa), inference::mcse_median(xb));
  r.pass = std::abs(r.median_a - r.median_b) <= 2.0 * r.combined_se;
  return r;
}

struct DiagnoseOptions {
  int bins = 30;
  int kde_points = 200;
  int max_lag = 50;  // the lag-30 value is always included
};

struct DiagnoseReport {
  std::vector<ReplicationCheck> replication;
  nlohmann::ordered_json summary;
  bool pass = true;
};

/// Writes plot data for each trace (histogram, smoothed density, ACF, mean block count) and,
/// when several traces share parameter names, the seed-replication check between consecutive pairs.
inline DiagnoseReport diagnose(const std::vector<std::filesystem::path>& traces, const std::filesystem::path& out_dir,
                               const DiagnoseOptions& opt = {}) {
  if (traces.empty()) throw ConfigError("diagnose: need at least one trace");
  std::filesystem::create_directories(out_dir);
  using simulate::format_double;
  DiagnoseReport rep;
  rep.summary["traces"] = nlohmann::ordered_json::array();
  std::vector<inference::Trace> loaded;
  const int max_lag = std::max(opt.max_lag, 30);
  for (const auto& path : traces) {
    auto t = inference::read_trace(path);
    if (t.size() <= t.burn_in) throw ConfigError("diagnose: no post-burn-in draws in " + path.string());
    const auto stem = path.stem().string();
    std::ofstream hist(out_dir / (stem + ".hist.csv")), kde(out_dir / (stem + ".kde.csv")), acf(out_dir / (stem + ".acf.csv")),
        blocks(out_dir / (stem + ".blocks.csv"));
    hist << "param,bin,lower,upper,count,density\n";
    kde << "param,x,density,bandwidth\n";
    acf << "param,lag,acf\n";
    blocks << "iter,mean_blocks\n";
    nlohmann::ordered_json tj;
    tj["trace"] = path.string();
    tj["parameters"] = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < t.names.size(); ++p) {
      const auto x = t.kept(static_cast<int>(p));
      const auto& name = t.names[p];
      const auto h = histogram(x, opt.bins);
      for (std::size_t b = 0; b < h.counts.size(); ++b)
        hist << name << ',' << b + 1 << ',' << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ',' << h.counts[b]
             << ',' << format_double(h.density[b]) << '\n';
      const auto d = kernel_density(x, opt.kde_points);
      for (std::size_t g = 0; g < d.grid.size(); ++g)
        kde << name << ',' << format_double(d.grid[g]) << ',' << format_double(d.density[g]) << ',' << format_double(d.bandwidth) << '\n';
      const auto a = acf_series(x, max_lag);
      for (std::size_t lag = 0; lag < a.size(); ++lag) acf << name << ',' << lag << ',' << format_double(a[lag]) << '\n';
      const auto s = inference::summarize(name, x);
      nlohmann::ordered_json pj;
      pj["name"] = name;
      pj["median"] = s.median;
      pj["mean"] = s.mean;
      pj["sd"] = s.sd;
      pj["lower"] = s.lower;
      pj["upper"] = s.upper;
      pj["mc_se_median"] = s.mc_se_median;
      pj["bandwidth"] = d.bandwidth;
      pj["occupied_bins"] = std::count_if(h.counts.begin(), h.counts.end(), [](long c) { return c > 0; });
      if (a.size() > 30) pj["acf_lag30"] = a[30];
      tj["parameters"].push_back(pj);
    }
    for (int i = 0; i < t.size(); ++i) blocks << i + 1 << ',' << format_double(t.mean_blocks[static_cast<std::size_t>(i)]) << '\n';
    tj["mean_blocks"] = inference::mean(t.kept_mean_blocks());
    rep.summary["traces"].push_back(tj);
    loaded.push_back(std::move(t));
  }
  rep.summary["replication"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i + 1 < loaded.size(); ++i) {
    if (loaded[i].names != loaded[i + 1].names) continue;
    for (const auto& name : loaded[i].names) {
      auto r = replication_check(loaded[i], loaded[i + 1], name);
      r.first = traces[i].string();
      r.second = traces[i + 1].string();
      rep.pass = rep.pass && r.pass;
      rep.summary["replication"].push_back({{"param", name}, {"first", r.first}, {"second", r.second}, {"median_first", r.median_a},
                                            {"median_second", r.median_b}, {"combined_se", r.combined_se}, {"pass", r.pass}});
      rep.replication.push_back(std::move(r));
    }
  }
  rep.summary["pass"] = rep.pass;
  std::ofstream(out_dir / "diagnose.json") << rep.summary.dump(2) << '\n';
  return rep;
}

}  // namespace maxbayes::experiments
