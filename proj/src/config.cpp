#include "maglab/config.hpp"

#include "maglab/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace maglab {

using nlohmann::json;

double ExperimentConfig::tol(const std::string& key, double fallback) const {
  auto it = tolerances.find(key);
  return it == tolerances.end() ? fallback : it->second;
}

namespace {

[[noreturn]] void config_error(const std::string& what) { fail(Errc::ConfigError, what); }

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) config_error("unknown key '" + key + "' in " + where);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.schema_version != kConfigSchemaVersion)
    config_error("unsupported schema_version " + std::to_string(cfg.schema_version));
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end())
    config_error("unknown experiment '" + cfg.experiment + "'");
  try {
    cfg.grid.validate();
  } catch (const Error& e) {
    config_error(std::string("grid: ") + e.what());
  }
  if (cfg.h_list.empty()) config_error("h_list must not be empty");
  for (std::size_t i = 0; i < cfg.h_list.size(); ++i) {
    if (!(cfg.h_list[i] > 0)) config_error("h_list entries must be positive");
    if (i > 0 && !(cfg.h_list[i] < cfg.h_list[i - 1]))
      config_error("h_list must be strictly decreasing");
  }
  for (std::size_t i = 1; i < cfg.t_grid.size(); ++i)
    if (!(cfg.t_grid[i] > cfg.t_grid[i - 1])) config_error("t_grid must be strictly increasing");
  for (double t : cfg.t_grid)
    if (t < 0) config_error("t_grid entries must be nonnegative");
  for (double b : cfg.beta_list)
    if (b < 0) config_error("beta_list entries must be nonnegative");
  if (cfg.n < 0 || cfg.k < 0) config_error("n and k must be nonnegative");
  try {
    cfg.propagator.validate();
  } catch (const Error& e) {
    config_error(std::string("propagator: ") + e.what());
  }
  FieldModel model = [&] {
    try {
      return build_model(cfg.model, cfg.grid);
    } catch (const Error& e) {
      if (e.code() == Errc::ConfigError) throw;
      config_error(std::string("model: ") + e.what());
    }
  }();
  if (model.b0() > 0)
    for (double h : cfg.h_list)
      if (cfg.grid.spacing() > std::sqrt(h / model.b0()) / 4.0)
        config_error("grid spacing exceeds a quarter of the magnetic length at h = " +
                     std::to_string(h));
  const std::size_t d = cfg.grid.dim;
  if (!cfg.packet.center.empty() && cfg.packet.center.size() != d)
    config_error("packet.center must have d entries");
  if (!cfg.packet.momentum.empty() && cfg.packet.momentum.size() != d)
    config_error("packet.momentum must have d entries");
}

} // namespace

FieldModel build_model(const ModelDescriptor& desc, const GridSpec& grid) {
  auto param = [&](const char* key, double fallback) {
    auto it = desc.params.find(key);
    return it == desc.params.end() ? fallback : it->second;
  };
  static const std::map<std::string, std::set<std::string>> allowed{
      {"constant2d", {"b"}},
      {"perturbed2d", {"b", "eps", "omega"}},
      {"constant4d", {"b1", "b2"}},
      {"free", {"d"}}};
  auto it = allowed.find(desc.type);
  if (it == allowed.end()) config_error("unknown model type '" + desc.type + "'");
  for (const auto& [key, value] : desc.params)
    if (!it->second.count(key))
      config_error("unknown parameter '" + key + "' for model " + desc.type);

  FieldModel model = [&] {
    if (desc.type == "constant2d") return FieldModel::constant2d(param("b", 1.0));
    if (desc.type == "perturbed2d")
      return FieldModel::perturbed2d(param("b", 1.0), param("eps", 0.3), param("omega", 1.0),
                                     grid.half_width);
    if (desc.type == "constant4d")
      return FieldModel::constant4d(param("b1", 1.0), param("b2", 2.0));
    return FieldModel::free(static_cast<int>(param("d", grid.dim)));
  }();
  if (model.dim() != grid.dim)
    config_error("model dimension " + std::to_string(model.dim()) + " differs from grid d " +
                 std::to_string(grid.dim));
  return model;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");
  reject_unknown(j,
                 {"schema_version", "experiment", "model", "grid", "h_list", "n", "k", "alpha",
                  "t_grid", "M_horizon", "beta_list", "packet", "propagator", "tolerances", "seed",
                  "output"},
                 "config");

  ExperimentConfig cfg;
  cfg.schema_version = get_or(j, "schema_version", 0);
  cfg.experiment = get_or<std::string>(j, "experiment", "");
  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown(m, {"type", "params"}, "model");
    cfg.model.type = get_or<std::string>(m, "type", "");
    cfg.model.params = get_or<std::map<std::string, double>>(m, "params", {});
  } else {
    config_error("missing 'model'");
  }
  if (!j.contains("grid")) config_error("missing 'grid'");
  {
    const json& g = j.at("grid");
    reject_unknown(g, {"d", "half_width", "points"}, "grid");
    cfg.grid.dim = get_or(g, "d", 0);
    cfg.grid.half_width = get_or(g, "half_width", 0.0);
    cfg.grid.points = get_or(g, "points", 0);
  }
  cfg.h_list = get_or<std::vector<double>>(j, "h_list", {});
  cfg.n = get_or(j, "n", 1);
  cfg.k = get_or(j, "k", 3);
  cfg.alpha = get_or<std::vector<int>>(j, "alpha", {});
  cfg.t_grid = get_or<std::vector<double>>(j, "t_grid", {});
  cfg.M_horizon = get_or(j, "M_horizon", 1.0);
  cfg.beta_list = get_or<std::vector<double>>(j, "beta_list", {});
  if (j.contains("packet")) {
    const json& p = j.at("packet");
    reject_unknown(p, {"center", "momentum", "width"}, "packet");
    cfg.packet.center = get_or<std::vector<double>>(p, "center", {});
    cfg.packet.momentum = get_or<std::vector<double>>(p, "momentum", {});
    cfg.packet.width = get_or(p, "width", 0.0);
  }
  if (j.contains("propagator")) {
    const json& p = j.at("propagator");
    reject_unknown(p, {"krylov_dim", "dt", "tol", "max_steps"}, "propagator");
    cfg.propagator.krylov_dim = get_or(p, "krylov_dim", cfg.propagator.krylov_dim);
    cfg.propagator.dt = get_or(p, "dt", cfg.propagator.dt);
    cfg.propagator.tol = get_or(p, "tol", cfg.propagator.tol);
    cfg.propagator.max_steps = get_or(p, "max_steps", cfg.propagator.max_steps);
  }
  cfg.tolerances = get_or<std::map<std::string, double>>(j, "tolerances", {});
  cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, {"csv", "json"}, "output");
    cfg.output.csv = get_or<std::string>(o, "csv", "");
    cfg.output.json = get_or<std::string>(o, "json", "");
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["experiment"] = cfg.experiment;
  j["model"] = {{"type", cfg.model.type}, {"params", cfg.model.params}};
  j["grid"] = {{"d", cfg.grid.dim}, {"half_width", cfg.grid.half_width}, {"points", cfg.grid.points}};
  j["h_list"] = cfg.h_list;
  j["n"] = cfg.n;
  j["k"] = cfg.k;
  j["alpha"] = cfg.alpha;
  j["t_grid"] = cfg.t_grid;
  j["M_horizon"] = cfg.M_horizon;
  j["beta_list"] = cfg.beta_list;
  j["packet"] = {{"center", cfg.packet.center},
                 {"momentum", cfg.packet.momentum},
                 {"width", cfg.packet.width}};
  j["propagator"] = {{"krylov_dim", cfg.propagator.krylov_dim},
                     {"dt", cfg.propagator.dt},
                     {"tol", cfg.propagator.tol},
                     {"max_steps", cfg.propagator.max_steps}};
  j["tolerances"] = cfg.tolerances;
  j["seed"] = cfg.seed;
  j["output"] = {{"csv", cfg.output.csv}, {"json", cfg.output.json}};
  return j.dump(2);
}

} // namespace maglab
