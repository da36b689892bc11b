#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "maxbayes/errors.hpp"
#include "maxbayes/inference/chain.hpp"
#include "maxbayes/inference/model_template.hpp"
#include "maxbayes/models/model.hpp"
#include "maxbayes/models/spatial.hpp"
#include "maxbayes/rng.hpp"
#include "maxbayes/simulate/samplers.hpp"

namespace maxbayes::experiments {

using nlohmann::json;

enum class Kind { rmse_maxstable, rmse_clayton, rmse_margins, coverage, bayes_factor, single_fit, simulate_only };

inline Kind parse_kind(const std::string& s) {
  static const std::map<std::string, Kind> kinds{{"rmse-maxstable", Kind::rmse_maxstable}, {"rmse-clayton", Kind::rmse_clayton},
                                                 {"rmse-margins", Kind::rmse_margins},     {"coverage", Kind::coverage},
                                                 {"bayes-factor", Kind::bayes_factor},     {"single-fit", Kind::single_fit},
                                                 {"simulate-only", Kind::simulate_only}};
  const auto it = kinds.find(s);
  if (it == kinds.end()) throw ConfigError("manifest: unknown experiment kind '" + s + "'");
  return it->second;
}

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::rmse_maxstable: return "rmse-maxstable";
    case Kind::rmse_clayton: return "rmse-clayton";
    case Kind::rmse_margins: return "rmse-margins";
    case Kind::coverage: return "coverage";
    case Kind::bayes_factor: return "bayes-factor";
    case Kind::single_fit: return "single-fit";
    case Kind::simulate_only: return "simulate-only";
  }
  return "?";
}

/// One fully specified simulation-and-fit setting.
struct Cell {
  std::string name;
  json spec;  // the cell's JSON after grid substitution, kept for the output record
  simulate::SimJob job{models::ModelSpec(models::Logistic(2, 0.5))};
  inference::ModelTemplate fit;
  std::vector<std::string> truth_names;
  std::vector<double> truth;
  std::optional<std::filesystem::path> data_file;  // single-fit on a dataset file
};

struct Manifest {
  Kind kind = Kind::rmse_maxstable;
  std::string name;
  std::uint64_t master_seed = 1;
  int replicates = 1;
  std::vector<std::string> estimators;
  inference::McmcConfig mcmc;
  double level = 0.95;  // credible level for coverage
  std::vector<Cell> cells;
  json source;
};

namespace detail {

inline double number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw ConfigError(std::string("manifest: cell needs numeric '") + key + "'");
  return j[key].get<double>();
}

inline models::Sites sites_of(const json& c, int k) {
  models::Sites s;
  if (c.contains("sites")) {
    const auto& rows = c["sites"];
    if (!rows.is_array() || static_cast<int>(rows.size()) != k) throw ConfigError("manifest: 'sites' needs one row per component");
    const auto dim = static_cast<Eigen::Index>(rows[0].size());
    s.resize(k, dim);
    for (int i = 0; i < k; ++i)
      for (Eigen::Index d = 0; d < dim; ++d) s(i, d) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)].get<double>();
  } else {
    s.resize(k, 1);
    for (int i = 0; i < k; ++i) s(i, 0) = i;
  }
  return s;
}

inline inference::MarginModel margin_model(const std::string& s) {
  if (s == "unit") return inference::MarginModel::unit;
  if (s == "common_gev") return inference::MarginModel::common_gev;
  if (s == "shape_trend") return inference::MarginModel::shape_trend;
  throw ConfigError("manifest: unknown fit_margins '" + s + "'");
}

inline inference::McmcConfig mcmc_of(const json& j) {
  inference::McmcConfig c;
  if (j.is_null()) return c;
  c.n_iter = j.value("n_iter", c.n_iter);
  c.burn_in = j.value("burn_in", c.burn_in);
  c.gibbs_per_iter = j.value("gibbs_per_iter", c.gibbs_per_iter);
  c.target_accept = j.value("target_accept", c.target_accept);
  c.init_step = j.value("init_step", c.init_step);
  c.spike_proposal = j.value("spike_proposal", c.spike_proposal);
  const auto init = j.value("init_partition", std::string("singletons"));
  if (init == "one_block")
    c.init_partition = inference::McmcConfig::InitPartition::one_block;
  else if (init != "singletons")
    throw ConfigError("manifest: init_partition must be singletons or one_block");
  c.validate();
  return c;
}

}  // namespace detail

/// Seed of a cell's simulation streams, keyed on its name so that adding cells leaves others unchanged.
inline std::uint64_t cell_seed(std::uint64_t master, const std::string& name) {
  return make_rng(master, std::stoull(inference::fnv1a_hex(name), nullptr, 16))();
}

/// Builds a cell from its JSON description.
inline Cell parse_cell(const json& c, const std::string& fallback_name, std::uint64_t master_seed) {
  Cell cell;
  cell.spec = c;
  cell.name = c.value("name", fallback_name);
  if (cell.name.empty() || cell.name.find_first_of("/\\,\n\"") != std::string::npos)
    throw ConfigError("manifest: cell names must be non-empty and free of / \\ , \" and newlines");
  const std::string family = c.value("family", std::string("logistic"));
  const int k = c.value("k", 0);
  if (k < 2) throw ConfigError("manifest: cell '" + cell.name + "' needs k >= 2");
  const int n = c.value("n", 0);
  if (n < 1) throw ConfigError("manifest: cell '" + cell.name + "' needs n >= 1");

  auto& fit = cell.fit;
  fit.k = k;
  models::Family fam = models::Logistic(2, 0.5);
  if (family == "logistic") {
    fit.dependence = inference::Dependence::logistic;
    const double th = detail::number(c, "theta");
    fam = models::Logistic(k, th);
    cell.truth_names = {"theta"};
    cell.truth = {th};
  } else if (family == "dirichlet") {
    fit.dependence = inference::Dependence::dirichlet;
    const auto alpha = c.at("alpha").get<std::vector<double>>();
    if (static_cast<int>(alpha.size()) != k) throw ConfigError("manifest: 'alpha' needs k entries");
    fam = models::Dirichlet(alpha);
    for (int i = 1; i <= k; ++i) cell.truth_names.push_back("alpha_" + std::to_string(i));
    cell.truth = alpha;
  } else if (family == "brown_resnick" || family == "extremal_t") {
    fit.sites = detail::sites_of(c, k);
    const double s = detail::number(c, "s"), a = detail::number(c, "smoothness");
    if (family == "brown_resnick") {
      fit.dependence = inference::Dependence::brown_resnick;
      fam = models::HuslerReiss(models::brown_resnick_lambda_sq(fit.sites, s, a));
    } else {
      fit.dependence = inference::Dependence::extremal_t;
      fit.nu = detail::number(c, "nu");
      fam = models::ExtremalT(models::powered_exponential_correlation(fit.sites, s, a), fit.nu);
    }
    cell.truth_names = {"s", "alpha"};
    cell.truth = {s, a};
  } else {
    throw ConfigError("manifest: unknown family '" + family + "'");
  }

  std::optional<std::vector<models::GevMargin>> margins;
  std::string default_fit = "unit";
  if (c.contains("margins") && !c["margins"].is_null()) {
    const auto& m = c["margins"];
    const double mu = detail::number(m, "mu"), sigma = detail::number(m, "sigma");
    if (m.contains("xi_beta")) {
      const double xa = detail::number(m, "xi_alpha"), xb = detail::number(m, "xi_beta");
      std::vector<models::GevMargin> ms;
      for (int i = 1; i <= k; ++i) ms.push_back({mu, sigma, xa + i * xb});
      margins = ms;
      default_fit = "shape_trend";
      cell.truth_names.insert(cell.truth_names.end(), {"mu", "sigma", "xi_alpha", "xi_beta"});
      cell.truth.insert(cell.truth.end(), {mu, sigma, xa, xb});
    } else {
      const double xi = detail::number(m, "xi");
      margins = std::vector<models::GevMargin>(static_cast<std::size_t>(k), models::GevMargin{mu, sigma, xi});
      default_fit = "common_gev";
      cell.truth_names.insert(cell.truth_names.end(), {"mu", "sigma", "xi"});
      cell.truth.insert(cell.truth.end(), {mu, sigma, xi});
    }
  }
  fit.margins = detail::margin_model(c.value("fit_margins", default_fit));
  fit.validate();
  if (fit.parameter_count() != static_cast<int>(cell.truth.size()))
    throw ConfigError("manifest: cell '" + cell.name + "' fit_margins does not match its margins");

  cell.job = simulate::SimJob{models::ModelSpec(std::move(fam), margins), n, cell_seed(master_seed, cell.name)};
  const std::string mode = c.value("mode", std::string("exact"));
  if (mode == "block_maxima") {
    cell.job.mode = simulate::SimMode::block_maxima;
    cell.job.block_size = c.value("block_size", 50);
  } else if (mode != "exact") {
    throw ConfigError("manifest: mode must be exact or block_maxima");
  }
  cell.job.validate();
  if (c.contains("data")) cell.data_file = c["data"].get<std::string>();
  return cell;
}

inline std::string format_grid_value(const json& v) {
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return simulate::format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// Grid keys address top-level cell fields or, with a dotted name, one nested field ("margins.xi_beta").
inline void set_field(json& cell, const std::string& key, const json& v) {
  const auto dot = key.find('.');
  if (dot == std::string::npos)
    cell[key] = v;
  else
    cell[key.substr(0, dot)][key.substr(dot + 1)] = v;
}

inline Manifest parse_manifest(const json& j) {
  Manifest m;
  m.source = j;
  m.kind = parse_kind(j.at("kind").get<std::string>());
  m.name = j.value("name", std::string(kind_name(m.kind)));
  m.master_seed = j.value("master_seed", std::uint64_t{1});
  m.replicates = j.value("replicates", 1);
  if (m.replicates < 1) throw ConfigError("manifest: replicates must be positive");
  m.mcmc = detail::mcmc_of(j.value("mcmc", json()));
  m.level = j.value("level", 0.95);
  if (!(m.level > 0.0 && m.level < 1.0)) throw ConfigError("manifest: level must lie in (0, 1)");
  static const std::vector<std::string> known{"bayes", "pairwise", "stephenson_tawn", "independence", "bayes_independence"};
  m.estimators = j.value("estimators", std::vector<std::string>{"bayes"});
  for (const auto& e : m.estimators)
    if (std::find(known.begin(), known.end(), e) == known.end()) throw ConfigError("manifest: unknown estimator '" + e + "'");

  std::vector<std::pair<std::string, json>> raw;
  if (j.contains("cells"))
    for (const auto& c : j["cells"]) raw.emplace_back("cell" + std::to_string(raw.size() + 1), c);
  if (j.contains("grid")) {
    if (!j.contains("cell")) throw ConfigError("manifest: 'grid' needs a 'cell' template");
    std::vector<std::pair<std::string, json>> expanded{{"", j["cell"]}};
    for (const auto& [key, values] : j["grid"].items()) {
      if (!values.is_array() || values.empty()) throw ConfigError("manifest: grid entry '" + key + "' must be a non-empty array");
      std::vector<std::pair<std::string, json>> next;
      for (const auto& [label, c] : expanded) {
        for (const auto& v : values) {
          json cc = c;
          set_field(cc, key, v);
          next.emplace_back(label + (label.empty() ? "" : "_") + key + "=" + format_grid_value(v), cc);
        }
      }
      expanded = std::move(next);
    }
    raw.insert(raw.end(), expanded.begin(), expanded.end());
  } else if (j.contains("cell")) {
    raw.emplace_back(m.name, j["cell"]);  // a template without a grid is one cell
  }
  if (raw.empty()) throw ConfigError("manifest: no cells");
  for (const auto& [label, c] : raw) m.cells.push_back(parse_cell(c, label, m.master_seed));
  for (std::size_t a = 0; a < m.cells.size(); ++a)
    for (std::size_t b = a + 1; b < m.cells.size(); ++b)
      if (m.cells[a].name == m.cells[b].name) throw ConfigError("manifest: duplicate cell name '" + m.cells[a].name + "'");
  return m;
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read manifest " + path.string());
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("manifest: malformed JSON in " + path.string());
  // dataset paths are relative to the manifest; pin them so a stored copy stays usable
  auto absolutize = [&](json& c) {
    if (c.is_object() && c.contains("data") && c["data"].is_string())
      c["data"] = std::filesystem::absolute(path.parent_path() / c["data"].get<std::string>()).lexically_normal().string();
  };
  if (j.contains("cells"))
    for (auto& c : j["cells"]) absolutize(c);
  if (j.contains("cell")) absolutize(j["cell"]);
  return parse_manifest(j);
}

}  // namespace maxbayes::experiments
