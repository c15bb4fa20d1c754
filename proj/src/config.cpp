#include "dagcusum/config.hpp"

#include "dagcusum/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace dagcusum {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "topology",      "noise",          "theta",        "tau",
    "b",             "mu",             "attack_time",  "secure_len",
    "q_rounds",      "alpha",          "h",            "kappa",
    "master_seed",   "detectors",      "h_grid",       "h_grids",
    "replications",  "horizon",        "output_path",  "collapsed_warmup",
    "eta3_times_n",  "clamp_mu",       "run_attacked", "run_unattacked",
    "weight_normalization"};

template <class T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(key) + ": wrong type (" +
                      j.at(key).type_name() + ")");
  }
}

std::vector<double> grid(const json& j, const std::string& name) {
  if (!j.is_array()) throw ConfigError(name + ": expected an array of numbers");
  std::vector<double> g;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(name + ": expected numbers");
    g.push_back(x.get<double>());
  }
  return g;
}

NetworkTopology topology_from(const json& j, const std::string& base_dir) {
  if (j.is_string()) {
    std::filesystem::path p(j.get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return load_topology_file(p.string());
  }
  if (j.is_object()) return parse_topology_json(j.dump());
  throw ConfigError("topology: expected a file path or an object");
}

// mu: a number (all insecure sensors), an array over insecure sensors in
// increasing index order, or an object {"<1-based sensor>": value}.
std::vector<double> mu_from(const json& j, const NetworkTopology& topo) {
  std::vector<double> mu(topo.size(), 0.0);
  if (j.is_number()) {
    for (int s : topo.insecure()) mu[s] = j.get<double>();
    return mu;
  }
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != topo.n_insecure()) {
      throw ConfigError("mu: array has " + std::to_string(j.size()) +
                        " entries but there are " +
                        std::to_string(topo.n_insecure()) +
                        " insecure sensors");
    }
    for (int i = 0; i < topo.n_insecure(); ++i) {
      if (!j[i].is_number()) throw ConfigError("mu: expected numbers");
      mu[topo.insecure()[i]] = j[i].get<double>();
    }
    return mu;
  }
  if (j.is_object()) {
    std::vector<bool> seen(topo.size(), false);
    for (const auto& [key, val] : j.items()) {
      int s = 0;
      try {
        std::size_t pos = 0;
        s = std::stoi(key, &pos);
        if (pos != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw ConfigError("mu: key '" + key + "' is not a sensor number");
      }
      if (s < 1 || s > topo.size()) {
        throw ConfigError("mu: sensor " + key + " outside 1.." +
                          std::to_string(topo.size()));
      }
      if (!val.is_number()) throw ConfigError("mu: value for " + key + " is not a number");
      mu[s - 1] = val.get<double>();
      seen[s - 1] = true;
    }
    for (int s : topo.insecure()) {
      if (!seen[s]) {
        throw ConfigError("mu: missing value for insecure sensor " +
                          std::to_string(s + 1));
      }
    }
    return mu;
  }
  throw ConfigError("mu: expected a number, array or object");
}

}  // namespace

ExperimentPlan parse_plan(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!kKnownKeys.count(key)) throw ConfigError("unknown config field '" + key + "'");
  }
  if (!j.contains("topology")) throw ConfigError("topology: missing");
  NetworkTopology topo = topology_from(j.at("topology"), base_dir);

  ScenarioConfig sc;
  sc.theta = field(j, "theta", sc.theta);
  sc.tau = field(j, "tau", sc.tau);
  sc.b = field(j, "b", sc.b);
  sc.attack_time = field(j, "attack_time", sc.attack_time);
  sc.secure_len = field(j, "secure_len", sc.secure_len);
  sc.q_rounds = field(j, "q_rounds", sc.q_rounds);
  sc.alpha = field(j, "alpha", sc.alpha);
  sc.h = field(j, "h", sc.h);
  if (j.contains("kappa")) sc.kappa = field(j, "kappa", 0.0);
  sc.master_seed = field<std::uint64_t>(j, "master_seed", sc.master_seed);
  if (!j.contains("mu")) throw ConfigError("mu: missing");
  sc.mu = mu_from(j.at("mu"), topo);

  ExperimentPlan plan(std::move(sc), std::move(topo));
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    if (!n.is_object()) throw ConfigError("noise: expected an object");
    plan.noise = NoiseModel::from_name(field<std::string>(n, "family", "gaussian"),
                                       field(n, "scale", 1.0));
  }
  if (j.contains("detectors")) {
    plan.detectors.clear();
    for (const auto& d : j.at("detectors")) {
      if (!d.is_string()) throw ConfigError("detectors: expected names");
      plan.detectors.push_back(detector_from_name(d.get<std::string>()));
    }
  }
  if (j.contains("h_grid")) plan.h_grid = grid(j.at("h_grid"), "h_grid");
  if (j.contains("h_grids")) {
    const json& g = j.at("h_grids");
    if (!g.is_object()) throw ConfigError("h_grids: expected an object");
    for (const auto& [name, val] : g.items()) {
      plan.h_grids[detector_from_name(name)] = grid(val, "h_grids." + name);
    }
  }
  if (plan.h_grid.empty() && std::isfinite(plan.scenario.h)) {
    plan.h_grid = {plan.scenario.h};
  }
  plan.replications = field(j, "replications", plan.replications);
  plan.horizon = field(j, "horizon", plan.horizon);
  plan.output_path = field<std::string>(j, "output_path", "results.csv");
  plan.weight_normalization = normalization_from_name(
      field<std::string>(j, "weight_normalization", "squared"));
  plan.collapsed_warmup = field(j, "collapsed_warmup", plan.collapsed_warmup);
  plan.eta3_times_n = field(j, "eta3_times_n", plan.eta3_times_n);
  plan.clamp_mu = field(j, "clamp_mu", plan.clamp_mu);
  plan.run_attacked = field(j, "run_attacked", plan.run_attacked);
  plan.run_unattacked = field(j, "run_unattacked", plan.run_unattacked);
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_plan(ss.str(), dir.empty() ? "." : dir.string());
}

void apply_paper_scale(ExperimentPlan& plan) {
  plan.scenario.secure_len = 5000;
  plan.replications = 2000;
}

}  // namespace dagcusum
