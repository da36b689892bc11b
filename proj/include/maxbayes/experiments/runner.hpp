#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "maxbayes/errors.hpp"
#include "maxbayes/experiments/manifest.hpp"
#include "maxbayes/inference/chain.hpp"
#include "maxbayes/inference/estimators.hpp"
#include "maxbayes/inference/hypothesis.hpp"
#include "maxbayes/inference/summary.hpp"
#include "maxbayes/inference/trace_io.hpp"
#include "maxbayes/rng.hpp"
#include "maxbayes/simulate/dataset.hpp"
#include "maxbayes/simulate/samplers.hpp"

namespace maxbayes::experiments {

namespace fs = std::filesystem;

struct RunOptions {
  int workers = 1;
  bool verbose = false;
  /// Stop after this many newly computed jobs (tests use it to interrupt a run); negative means no limit.
  long max_new_jobs = -1;
};

/// One row of results.csv.
struct RmseRow {
  std::string cell, estimator, param;
  int n = 0;
  double truth = 0.0, rmse = 0.0, bias = 0.0, mc_se = 0.0, scaled = 0.0;
};

struct CoverageRow {
  std::string cell, estimator, param;
  int n = 0;
  double coverage = 0.0, mc_se = 0.0;
};

struct BayesFactorRow {
  std::string cell, estimator;
  int n = 0;
  double median_b12 = 0.0;
  int lower_bounds = 0, upper_bounds = 0;  // replicates reporting a one-sided bound
};

struct ExperimentResult {
  fs::path dir;
  int jobs = 0;
  int completed = 0;
  int failed = 0;  // jobs with at least one estimator error
  bool finished = false;  // every job has a completion marker
  std::vector<RmseRow> rmse;
  std::vector<CoverageRow> coverage;
  std::vector<BayesFactorRow> bayes_factors;

  const RmseRow& rmse_at(const std::string& cell, const std::string& estimator, const std::string& param) const {
    for (const auto& r : rmse)
      if (r.cell == cell && r.estimator == estimator && r.param == param) return r;
    throw DomainError("no RMSE row for " + cell + "/" + estimator + "/" + param);
  }
  const CoverageRow& coverage_at(const std::string& cell, const std::string& estimator, const std::string& param) const {
    for (const auto& r : coverage)
      if (r.cell == cell && r.estimator == estimator && r.param == param) return r;
    throw DomainError("no coverage row for " + cell + "/" + estimator + "/" + param);
  }
  const BayesFactorRow& bayes_factor_at(const std::string& cell, const std::string& estimator) const {
    for (const auto& r : bayes_factors)
      if (r.cell == cell && r.estimator == estimator) return r;
    throw DomainError("no Bayes-factor row for " + cell + "/" + estimator);
  }
};

/// Dependence tables are read at 1e4 times the RMSE, margin tables at 1e3.
inline double table_scale(const std::string& param) {
  static const std::vector<std::string> margin{"mu", "sigma", "xi", "xi_alpha", "xi_beta"};
  return std::find(margin.begin(), margin.end(), param) != margin.end() ? 1e3 : 1e4;
}

inline fs::path job_path(const fs::path& dir, const std::string& cell, int rep) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rep_%05d.json", rep + 1);
  return dir / "jobs" / cell / buf;
}

namespace detail {

inline std::uint64_t chain_seed(const Cell& cell, int rep, std::uint64_t salt) {
  return make_rng(cell.job.seed, (std::uint64_t{1} << 32) + static_cast<std::uint64_t>(rep) * 8 + salt)();
}

inline void write_atomic(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

inline nlohmann::ordered_json named(const std::vector<std::string>& names, const std::vector<double>& values) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t p = 0; p < names.size(); ++p) j[names[p]] = values[p];
  return j;
}

inline simulate::Dataset load_data(const Cell& cell, int rep) {
  if (!cell.data_file) return simulate::simulate(cell.job, static_cast<std::uint64_t>(rep));
  const auto scale = cell.fit.margins == inference::MarginModel::unit ? simulate::MarginScale::unit_frechet : simulate::MarginScale::gev;
  auto reps = simulate::read_datasets_csv(*cell.data_file, scale);
  if (static_cast<std::size_t>(rep) >= reps.size()) throw ConfigError("data file has fewer replicates than requested");
  return std::move(reps[static_cast<std::size_t>(rep)]);
}

inline nlohmann::ordered_json bayes_record(const Manifest& m, const Cell& cell, const simulate::Dataset& data, int rep, bool independence,
                                           const fs::path& dir) {
  auto cfg = m.mcmc;
  cfg.independence_likelihood = independence;
  const auto defs = cell.fit.parameters();
  inference::Chain chain(data.obs, cell.fit, defs, cfg, chain_seed(cell, rep, independence ? 1 : 0));
  const auto& trace = chain.run();
  const auto s = inference::posterior_summary(trace, m.level);
  nlohmann::ordered_json r;
  std::vector<double> med, mean, lo, hi, se;
  for (const auto& p : s.parameters) {
    med.push_back(p.median);
    mean.push_back(p.mean);
    lo.push_back(p.lower);
    hi.push_back(p.upper);
    se.push_back(p.mc_se_median);
  }
  r["values"] = named(trace.names, med);
  r["mean"] = named(trace.names, mean);
  r["lower"] = named(trace.names, lo);
  r["upper"] = named(trace.names, hi);
  r["mc_se_median"] = named(trace.names, se);
  r["acceptance_rate"] = named(trace.names, trace.acceptance_rate);
  r["mean_blocks"] = s.mean_blocks;
  if (cell.fit.margins == inference::MarginModel::shape_trend) {
    const int slope = static_cast<int>(defs.size()) - 1;
    const auto bf = inference::bayes_factor_from_trace(trace, slope, defs.back().prior.a());
    r["b12"] = bf.b12;
    r["b12_kind"] = bf.kind == inference::BayesFactor::Kind::point ? "point"
                    : bf.kind == inference::BayesFactor::Kind::lower_bound ? "lower_bound"
                                                                          : "upper_bound";
    r["count_null"] = bf.count_null;
    r["count_alt"] = bf.count_alt;
  }
  if (m.kind == Kind::single_fit) {
    const auto base = dir / "traces" / (cell.name + (independence ? "_independence" : "") + "_rep" + std::to_string(rep + 1));
    fs::create_directories(base.parent_path());
    inference::write_trace(base.string() + ".csv", trace);
    std::ofstream(base.string() + ".summary.json") << inference::summary_json(s).dump(2) << '\n';
  }
  return r;
}

inline nlohmann::ordered_json point_record(const inference::Estimate& e) {
  nlohmann::ordered_json r;
  r["values"] = named(e.names, e.values);
  r["boundary"] = e.boundary;
  r["log_objective"] = e.log_objective;
  r["converged_starts"] = e.converged_starts;
  return r;
}

}  // namespace detail

/// Simulates one replicate of a cell and runs every estimator on it. Estimator failures are
/// recorded in the returned record rather than thrown.
inline nlohmann::ordered_json run_job(const Manifest& m, const Cell& cell, int rep, const fs::path& dir) {
  nlohmann::ordered_json rec;
  rec["cell"] = cell.name;
  rec["rep"] = rep + 1;
  rec["truth"] = detail::named(cell.truth_names, cell.truth);
  rec["estimates"] = nlohmann::ordered_json::object();
  simulate::Dataset data;
  try {
    data = detail::load_data(cell, rep);
  } catch (const std::exception& e) {
    rec["error"] = std::string("simulation: ") + e.what();
    return rec;
  }
  if (m.kind == Kind::simulate_only) return rec;
  for (const auto& name : m.estimators) {
    nlohmann::ordered_json r;
    try {
      if (name == "bayes" || name == "bayes_independence") {
        r = detail::bayes_record(m, cell, data, rep, name == "bayes_independence", dir);
      } else if (name == "pairwise") {
        r = detail::point_record(inference::pairwise_mle(data.obs, cell.fit));
      } else if (name == "independence") {
        r = detail::point_record(inference::independence_mle(data.obs, cell.fit));
      } else if (name == "stephenson_tawn") {
        r = detail::point_record(inference::stephenson_tawn_mle(data, cell.fit));
      }
    } catch (const std::exception& e) {
      r = nlohmann::ordered_json::object();
      r["error"] = e.what();
    }
    rec["estimates"][name] = r;
  }
  return rec;
}

namespace detail {

inline bool has_error(const nlohmann::json& rec) {
  if (rec.contains("error")) return true;
  for (const auto& [_, e] : rec["estimates"].items())
    if (e.contains("error")) return true;
  return false;
}

inline std::optional<nlohmann::json> read_job(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("cell")) return std::nullopt;
  return j;
}

inline double number_or_nan(const nlohmann::json& j) { return j.is_number() ? j.get<double>() : std::nan(""); }

inline std::string csv_number(double x) { return std::isfinite(x) ? simulate::format_double(x) : "NA"; }

}  // namespace detail

/// Aggregates the job records found under dir into result tables and writes them. Single-threaded.
inline ExperimentResult aggregate(const Manifest& m, const fs::path& dir) {
  ExperimentResult out;
  out.dir = dir;
  out.jobs = static_cast<int>(m.cells.size()) * m.replicates;
  std::ostringstream reps_csv, bf_csv;
  reps_csv << "cell,rep,estimator,param,truth,estimate,lower,upper\n";
  bf_csv << "cell,rep,estimator,b12,kind,count_null,count_alt\n";
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();

  for (const auto& cell : m.cells) {
    // estimator -> param -> errors (and coverage hits)
    std::map<std::string, std::map<std::string, std::vector<double>>> errors, hits;
    std::map<std::string, std::vector<double>> b12;
    std::map<std::string, std::pair<int, int>> bounds;
    for (int rep = 0; rep < m.replicates; ++rep) {
      const auto rec = detail::read_job(job_path(dir, cell.name, rep));
      if (!rec) continue;
      ++out.completed;
      if (detail::has_error(*rec)) {
        ++out.failed;
        nlohmann::ordered_json f;
        f["cell"] = cell.name;
        f["rep"] = rep + 1;
        if (rec->contains("error")) f["error"] = (*rec)["error"];
        for (const auto& [name, e] : (*rec)["estimates"].items())
          if (e.contains("error")) f[name] = e["error"];
        failures.push_back(f);
      }
      for (const auto& est : m.estimators) {
        if (!(*rec)["estimates"].contains(est)) continue;
        const auto& e = (*rec)["estimates"][est];
        if (e.contains("error")) continue;
        for (std::size_t p = 0; p < cell.truth_names.size(); ++p) {
          const auto& name = cell.truth_names[p];
          if (!e["values"].contains(name)) continue;
          const double truth = cell.truth[p];
          const double v = detail::number_or_nan(e["values"][name]);
          double lo = std::nan(""), hi = std::nan("");
          if (e.contains("lower")) {
            lo = detail::number_or_nan(e["lower"][name]);
            hi = detail::number_or_nan(e["upper"][name]);
            hits[est][name].push_back(lo <= truth && truth <= hi ? 1.0 : 0.0);
          }
          errors[est][name].push_back(v - truth);
          reps_csv << cell.name << ',' << rep + 1 << ',' << est << ',' << name << ',' << detail::csv_number(truth) << ','
                   << detail::csv_number(v) << ',' << detail::csv_number(lo) << ',' << detail::csv_number(hi) << '\n';
        }
        if (e.contains("b12")) {
          const double b = detail::number_or_nan(e["b12"]);
          const auto kind = e["b12_kind"].get<std::string>();
          b12[est].push_back(b);
          if (kind == "lower_bound") ++bounds[est].first;
          if (kind == "upper_bound") ++bounds[est].second;
          bf_csv << cell.name << ',' << rep + 1 << ',' << est << ',' << detail::csv_number(b) << ',' << kind << ','
                 << e["count_null"].get<long>() << ',' << e["count_alt"].get<long>() << '\n';
        }
      }
    }
    for (const auto& est : m.estimators) {
      for (std::size_t p = 0; p < cell.truth_names.size(); ++p) {
        const auto& name = cell.truth_names[p];
        const auto it = errors[est].find(name);
        if (it == errors[est].end() || it->second.empty()) continue;
        const auto& err = it->second;
        const double n = static_cast<double>(err.size());
        double sum = 0.0, sum_sq = 0.0;
        for (double x : err) {
          sum += x;
          sum_sq += x * x;
        }
        const double mse = sum_sq / n;
        double var_sq = 0.0;  // spread of the squared errors, for the delta-method error of the RMSE
        for (double x : err) var_sq += (x * x - mse) * (x * x - mse);
        var_sq = err.size() > 1 ? var_sq / (n - 1.0) : 0.0;
        RmseRow row{cell.name, est, name, static_cast<int>(err.size()), cell.truth[p], std::sqrt(mse), sum / n, 0.0, 0.0};
        row.mc_se = mse > 0.0 ? std::sqrt(var_sq / n) / (2.0 * row.rmse) : 0.0;
        row.scaled = row.rmse * table_scale(name);
        out.rmse.push_back(row);
        const auto& h = hits[est][name];
        if (!h.empty()) {
          const double c = inference::mean(h);
          out.coverage.push_back({cell.name, est, name, static_cast<int>(h.size()), c, std::sqrt(c * (1.0 - c) / static_cast<double>(h.size()))});
        }
      }
      const auto bit = b12.find(est);
      if (bit != b12.end() && !bit->second.empty())
        out.bayes_factors.push_back(
            {cell.name, est, static_cast<int>(bit->second.size()), inference::median(bit->second), bounds[est].first, bounds[est].second});
    }
  }
  out.finished = out.completed == out.jobs;
  if (m.kind == Kind::simulate_only && out.finished) {
    for (const auto& cell : m.cells) {
      std::vector<simulate::Dataset> reps;
      for (int rep = 0; rep < m.replicates; ++rep) reps.push_back(detail::load_data(cell, rep));
      fs::create_directories(dir / "data");
      simulate::write_datasets_csv(dir / "data" / (cell.name + ".csv"), reps);
    }
  }

  std::ostringstream rmse_csv, cov_csv, bfs_csv;
  rmse_csv << "cell,estimator,param,n,truth,rmse,bias,mc_se,scaled\n";
  for (const auto& r : out.rmse)
    rmse_csv << r.cell << ',' << r.estimator << ',' << r.param << ',' << r.n << ',' << detail::csv_number(r.truth) << ','
             << detail::csv_number(r.rmse) << ',' << detail::csv_number(r.bias) << ',' << detail::csv_number(r.mc_se) << ','
             << detail::csv_number(r.scaled) << '\n';
  cov_csv << "cell,estimator,param,n,coverage,mc_se\n";
  for (const auto& r : out.coverage)
    cov_csv << r.cell << ',' << r.estimator << ',' << r.param << ',' << r.n << ',' << detail::csv_number(r.coverage) << ','
            << detail::csv_number(r.mc_se) << '\n';
  bfs_csv << "cell,estimator,n,median_b12,lower_bounds,upper_bounds\n";
  for (const auto& r : out.bayes_factors)
    bfs_csv << r.cell << ',' << r.estimator << ',' << r.n << ',' << detail::csv_number(r.median_b12) << ',' << r.lower_bounds << ','
            << r.upper_bounds << '\n';

  nlohmann::ordered_json summary;
  summary["name"] = m.name;
  summary["kind"] = kind_name(m.kind);
  summary["jobs"] = out.jobs;
  summary["completed"] = out.completed;
  summary["failed"] = out.failed;
  summary["failures"] = failures;
  auto& rows = summary["rmse"] = nlohmann::ordered_json::array();
  for (const auto& r : out.rmse)
    rows.push_back({{"cell", r.cell}, {"estimator", r.estimator}, {"param", r.param}, {"n", r.n}, {"truth", r.truth},
                    {"rmse", r.rmse}, {"bias", r.bias}, {"mc_se", r.mc_se}, {"scaled", r.scaled}});
  auto& cov = summary["coverage"] = nlohmann::ordered_json::array();
  for (const auto& r : out.coverage)
    cov.push_back({{"cell", r.cell}, {"estimator", r.estimator}, {"param", r.param}, {"n", r.n}, {"coverage", r.coverage}, {"mc_se", r.mc_se}});
  auto& bfs = summary["bayes_factors"] = nlohmann::ordered_json::array();
  for (const auto& r : out.bayes_factors)
    bfs.push_back({{"cell", r.cell}, {"estimator", r.estimator}, {"n", r.n}, {"median_b12", r.median_b12},
                   {"lower_bounds", r.lower_bounds}, {"upper_bounds", r.upper_bounds}});

  detail::write_atomic(dir / "replicates.csv", reps_csv.str());
  detail::write_atomic(dir / "results.csv", rmse_csv.str());
  detail::write_atomic(dir / "coverage.csv", cov_csv.str());
  if (m.kind == Kind::bayes_factor) {
    detail::write_atomic(dir / "bayes_factors.csv", bfs_csv.str());
    detail::write_atomic(dir / "bayes_factor_replicates.csv", bf_csv.str());
  }
  detail::write_atomic(dir / "results.json", summary.dump(2) + "\n");
  return out;
}

/// Runs (or continues) every job lacking a completion marker, then aggregates.
/// Jobs are independent, so the worker count does not change any output.
inline ExperimentResult run_experiment(const Manifest& m, const fs::path& dir, const RunOptions& opt = {}) {
  fs::create_directories(dir);
  const auto stored = dir / "manifest.json";
  if (fs::exists(stored)) {
    std::ifstream in(stored);
    const auto prev = nlohmann::json::parse(in, nullptr, false);
    if (prev.is_discarded() || prev != m.source)
      throw ConfigError("output directory " + dir.string() + " holds a different experiment");
  } else {
    detail::write_atomic(stored, m.source.dump(2) + "\n");
  }

  struct Pending {
    std::size_t cell;
    int rep;
  };
  std::vector<Pending> todo;
  for (std::size_t c = 0; c < m.cells.size(); ++c)
    for (int r = 0; r < m.replicates; ++r)
      if (!detail::read_job(job_path(dir, m.cells[c].name, r))) todo.push_back({c, r});
  if (opt.max_new_jobs >= 0 && static_cast<long>(todo.size()) > opt.max_new_jobs) todo.resize(static_cast<std::size_t>(opt.max_new_jobs));

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t t = next++; t < todo.size(); t = next++) {
      const auto& cell = m.cells[todo[t].cell];
      const auto start = std::chrono::steady_clock::now();
      auto rec = run_job(m, cell, todo[t].rep, dir);
      detail::write_atomic(job_path(dir, cell.name, todo[t].rep), rec.dump(2) + "\n");
      if (opt.verbose) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::lock_guard lock(log_mutex);
        std::fprintf(stderr, "[%zu/%zu] %s rep %d%s (%.1fs)\n", t + 1, todo.size(), cell.name.c_str(), todo[t].rep + 1,
                     detail::has_error(rec) ? " FAILED" : "", secs);
      }
    }
  };
  const int workers = std::max(1, opt.workers);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return aggregate(m, dir);
}

/// Continues the experiment stored in dir.
inline ExperimentResult resume_experiment(const fs::path& dir, const RunOptions& opt = {}) {
  return run_experiment(load_manifest(dir / "manifest.json"), dir, opt);
}

}  // namespace maxbayes::experiments
