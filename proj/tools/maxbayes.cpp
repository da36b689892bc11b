// Command-line front end: simulate, fit, experiment run/resume, diagnose, report.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maxbayes/errors.hpp"
#include "maxbayes/experiments/diagnose.hpp"
#include "maxbayes/experiments/manifest.hpp"
#include "maxbayes/experiments/report.hpp"
#include "maxbayes/experiments/runner.hpp"
#include "maxbayes/inference/chain.hpp"
#include "maxbayes/inference/estimators.hpp"
#include "maxbayes/inference/summary.hpp"
#include "maxbayes/inference/trace_io.hpp"
#include "maxbayes/simulate/dataset.hpp"
#include "maxbayes/simulate/samplers.hpp"

namespace fs = std::filesystem;
namespace ex = maxbayes::experiments;
namespace inf = maxbayes::inference;
namespace sim = maxbayes::simulate;
using nlohmann::json;

namespace {

// Flags shared by simulate and fit that describe one model.
struct ModelFlags {
  std::string family = "logistic";
  int k = 0;
  double theta = 0.5;
  std::vector<double> alpha;
  double s = 1.0, smoothness = 1.0, nu = 2.0;
  std::optional<double> mu, sigma, xi, xi_beta;
  std::string fit_margins;

  void add(CLI::App* app) {
    app->add_option("--family", family, "logistic | dirichlet | brown_resnick | extremal_t")->capture_default_str();
    app->add_option("--k", k, "dimension");
    app->add_option("--theta", theta, "logistic dependence")->capture_default_str();
    app->add_option("--alpha", alpha, "Dirichlet parameters");
    app->add_option("--s", s, "spatial scale")->capture_default_str();
    app->add_option("--smoothness", smoothness, "spatial smoothness")->capture_default_str();
    app->add_option("--nu", nu, "extremal-t degrees of freedom")->capture_default_str();
    app->add_option("--mu", mu, "GEV location (all margins)");
    app->add_option("--sigma", sigma, "GEV scale");
    app->add_option("--xi", xi, "GEV shape, or trend intercept with --xi-beta");
    app->add_option("--xi-beta", xi_beta, "shape trend slope");
    app->add_option("--fit-margins", fit_margins, "unit | common_gev | shape_trend");
  }

  json cell(int n) const {
    json c{{"name", "cli"}, {"family", family}, {"k", k}, {"n", n}};
    if (family == "logistic") c["theta"] = theta;
    if (family == "dirichlet") c["alpha"] = alpha;
    if (family == "brown_resnick" || family == "extremal_t") {
      c["s"] = s;
      c["smoothness"] = smoothness;
      c["nu"] = nu;
    }
    if (mu || sigma || xi) {
      json m{{"mu", mu.value_or(0.0)}, {"sigma", sigma.value_or(1.0)}};
      if (xi_beta) {
        m["xi_alpha"] = xi.value_or(0.0);
        m["xi_beta"] = *xi_beta;
      } else {
        m["xi"] = xi.value_or(0.0);
      }
      c["margins"] = m;
    }
    if (!fit_margins.empty()) c["fit_margins"] = fit_margins;
    return c;
  }
};

struct McmcFlags {
  int n_iter = 1500, burn_in = 500;
  long gibbs = -1;
  void add(CLI::App* app) {
    app->add_option("--n-iter", n_iter, "MCMC iterations including burn-in")->capture_default_str();
    app->add_option("--burn-in", burn_in, "burn-in iterations")->capture_default_str();
    app->add_option("--gibbs-per-iter", gibbs, "partition updates per iteration (negative: N k)")->capture_default_str();
  }
  inf::McmcConfig config() const {
    inf::McmcConfig c;
    c.n_iter = n_iter;
    c.burn_in = burn_in;
    c.gibbs_per_iter = gibbs;
    c.validate();
    return c;
  }
};

void print_estimate(const std::string& label, const inf::Estimate& e) {
  std::printf("%s:", label.c_str());
  for (std::size_t p = 0; p < e.names.size(); ++p) std::printf(" %s=%.6g", e.names[p].c_str(), e.values[p]);
  std::printf("%s\n", e.boundary ? " (boundary)" : "");
}

int finish_experiment(const ex::ExperimentResult& r) {
  std::cout << ex::report(r.dir);
  if (!r.finished) return 1;
  return r.failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-likelihood Bayesian inference for max-stable distributions"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;
  bool seed_given = false;

  auto* simulate_cmd = app.add_subcommand("simulate", "draw replicate datasets to CSV");
  ModelFlags sim_model;
  sim_model.add(simulate_cmd);
  int sim_n = 100, sim_reps = 1, block_size = 0;
  simulate_cmd->add_option("--n", sim_n, "observations per replicate")->capture_default_str();
  simulate_cmd->add_option("--reps", sim_reps, "replicates")->capture_default_str();
  simulate_cmd->add_option("--block-size", block_size, "draw Clayton block maxima of this size instead of exact samples");

  auto* fit_cmd = app.add_subcommand("fit", "fit one dataset file");
  ModelFlags fit_model;
  fit_model.add(fit_cmd);
  McmcFlags fit_mcmc;
  fit_mcmc.add(fit_cmd);
  std::string data_file;
  std::vector<std::string> estimators{"bayes"};
  int fit_rep = 1;
  fit_cmd->add_option("data", data_file, "dataset CSV")->required();
  fit_cmd->add_option("--rep", fit_rep, "replicate within the file (1-based)")->capture_default_str();
  fit_cmd->add_option("--estimator", estimators, "bayes | bayes_independence | pairwise | independence | stephenson_tawn");

  auto* exp_cmd = app.add_subcommand("experiment", "run or resume a manifest");
  exp_cmd->require_subcommand(1);
  auto* run_cmd = exp_cmd->add_subcommand("run", "run a manifest");
  std::string manifest_file;
  run_cmd->add_option("manifest", manifest_file, "manifest JSON")->required();
  auto* resume_cmd = exp_cmd->add_subcommand("resume", "finish an interrupted run");
  std::string resume_dir;
  resume_cmd->add_option("dir", resume_dir, "output directory of the run")->required();

  auto* diag_cmd = app.add_subcommand("diagnose", "plot data and replication check for trace files");
  std::vector<std::string> trace_files;
  int bins = 30;
  diag_cmd->add_option("traces", trace_files, "trace CSV files")->required();
  diag_cmd->add_option("--bins", bins, "histogram bins")->capture_default_str();

  auto* report_cmd = app.add_subcommand("report", "print the result tables of a run");
  std::string report_dir;
  report_cmd->add_option("dir", report_dir, "output directory of the run")->required();

  for (auto* c : {simulate_cmd, fit_cmd, run_cmd, resume_cmd, diag_cmd}) {
    c->add_option("--out", out, "output path");
    c->add_option("--workers", workers, "worker threads")->capture_default_str();
    c->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { seed = s, seed_given = true; }, "master seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*simulate_cmd) {
      if (out.empty()) throw maxbayes::ConfigError("simulate: --out is required");
      json c = sim_model.cell(sim_n);
      if (block_size > 0) {
        c["mode"] = "block_maxima";
        c["block_size"] = block_size;
      }
      const auto cell = ex::parse_cell(c, "cli", seed);
      std::vector<sim::Dataset> reps;
      for (int r = 0; r < sim_reps; ++r) reps.push_back(sim::simulate(cell.job, static_cast<std::uint64_t>(r)));
      sim::write_datasets_csv(out, reps);
      std::printf("wrote %d replicate(s) of %d x %d to %s\n", sim_reps, sim_n, cell.fit.k, out.c_str());
      return 0;
    }
    if (*fit_cmd) {
      const bool gev = fit_model.mu || fit_model.sigma || fit_model.xi || (!fit_model.fit_margins.empty() && fit_model.fit_margins != "unit");
      const auto reps = sim::read_datasets_csv(data_file, gev ? sim::MarginScale::gev : sim::MarginScale::unit_frechet);
      if (fit_rep < 1 || fit_rep > static_cast<int>(reps.size())) throw maxbayes::ConfigError("fit: --rep out of range");
      const auto& data = reps[static_cast<std::size_t>(fit_rep - 1)];
      if (fit_model.k == 0) fit_model.k = data.k;
      if (gev && fit_model.fit_margins.empty()) fit_model.fit_margins = fit_model.xi_beta ? "shape_trend" : "common_gev";
      // the cell's true values are placeholders here; only its fitting template is used
      if (gev && !fit_model.mu) fit_model.mu = 0.0;
      if (fit_model.fit_margins == "shape_trend" && !fit_model.xi_beta) fit_model.xi_beta = 0.0;
      if (fit_model.family == "dirichlet" && fit_model.alpha.empty()) fit_model.alpha.assign(static_cast<std::size_t>(fit_model.k), 1.0);
      const auto cell = ex::parse_cell(fit_model.cell(data.size()), "fit", seed);
      const auto cfg = fit_mcmc.config();
      for (const auto& est : estimators) {
        if (est == "bayes" || est == "bayes_independence") {
          auto c = cfg;
          c.independence_likelihood = est == "bayes_independence";
          inf::Chain chain(data.obs, cell.fit, cell.fit.parameters(), c, seed);
          const auto& trace = chain.run();
          const auto s = inf::posterior_summary(trace);
          for (const auto& p : s.parameters)
            std::printf("%s: %s median=%.6g mean=%.6g 95%%=[%.6g, %.6g] mc_se=%.2g\n", est.c_str(), p.name.c_str(), p.median, p.mean,
                        p.lower, p.upper, p.mc_se_median);
          if (!out.empty()) {
            fs::create_directories(out);
            const auto base = fs::path(out) / ("trace_" + est);
            inf::write_trace(base.string() + ".csv", trace);
            std::ofstream(base.string() + ".summary.json") << inf::summary_json(s).dump(2) << '\n';
          }
        } else if (est == "pairwise") {
          print_estimate(est, inf::pairwise_mle(data.obs, cell.fit));
        } else if (est == "independence") {
          print_estimate(est, inf::independence_mle(data.obs, cell.fit));
        } else if (est == "stephenson_tawn") {
          print_estimate(est, inf::stephenson_tawn_mle(data, cell.fit));
        } else {
          throw maxbayes::ConfigError("fit: unknown estimator " + est);
        }
      }
      return 0;
    }
    ex::RunOptions opt;
    opt.workers = workers;
    opt.verbose = true;
    if (*run_cmd) {
      std::ifstream in(manifest_file);
      if (!in) throw maxbayes::ConfigError("cannot read manifest " + manifest_file);
      auto m = ex::load_manifest(manifest_file);
      if (seed_given) {
        auto src = m.source;
        src["master_seed"] = seed;
        m = ex::parse_manifest(src);
      }
      const fs::path dir = !out.empty() ? fs::path(out) : fs::path(m.source.value("output", "runs/" + m.name));
      return finish_experiment(ex::run_experiment(m, dir, opt));
    }
    if (*resume_cmd) return finish_experiment(ex::resume_experiment(resume_dir, opt));
    if (*diag_cmd) {
      std::vector<fs::path> paths(trace_files.begin(), trace_files.end());
      ex::DiagnoseOptions dopt;
      dopt.bins = bins;
      const auto r = ex::diagnose(paths, out.empty() ? fs::path("diagnostics") : fs::path(out), dopt);
      std::cout << r.summary.dump(2) << '\n';
      return r.pass ? 0 : 1;
    }
    if (*report_cmd) {
      const auto text = ex::report(report_dir);
      std::ofstream(fs::path(report_dir) / "report.md") << text;
      std::cout << text;
      return 0;
    }
  } catch (const maxbayes::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
