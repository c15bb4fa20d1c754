#include "cli.hpp"

#include "dagcusum/bounds.hpp"
#include "dagcusum/config.hpp"
#include "dagcusum/errors.hpp"
#include "dagcusum/estimators.hpp"
#include "dagcusum/experiment.hpp"
#include "dagcusum/format.hpp"
#include "dagcusum/noise.hpp"
#include "dagcusum/topology.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <optional>
#include <ostream>

namespace dagcusum {

namespace {

void json_error(std::ostream& err, const std::string& kind,
                const std::string& message) {
  nlohmann::json j;
  j["error"] = kind;
  j["message"] = message;
  err << j.dump() << '\n';
}

std::string resolve_output(const std::string& path) {
  const char* dir = std::getenv("DAGCUSUM_OUTPUT_DIR");
  if (dir == nullptr || *dir == '\0') return path;
  return (std::filesystem::path(dir) / std::filesystem::path(path).filename())
      .string();
}

int cmd_simulate(const std::string& config, const std::optional<std::string>& out_path,
                 const std::optional<std::uint64_t>& seed, int parallel,
                 bool paper_scale, const std::optional<std::string>& trace_dir,
                 std::ostream& out, std::ostream& err) {
  ExperimentPlan plan = load_plan(config);
  if (paper_scale) apply_paper_scale(plan);
  if (seed) plan.scenario.master_seed = *seed;
  if (out_path) plan.output_path = *out_path;
  if (trace_dir) plan.trace_dir = *trace_dir;
  const ExperimentOutput result = run_experiment(plan, parallel);
  for (const auto& w : result.warnings) {
    nlohmann::json j;
    j["warning"] = w;
    err << j.dump() << '\n';
  }
  if (result.degenerate_events > 0) {
    nlohmann::json j;
    j["warning"] = "statistic held at previous value on degenerate input";
    j["events"] = result.degenerate_events;
    err << j.dump() << '\n';
  }
  const std::string path = resolve_output(plan.output_path);
  emit_csv(path, result.results);
  out << "wrote " << result.results.size() << " rows to " << path << '\n';
  return 0;
}

int cmd_bounds(std::optional<double> q, const std::optional<std::string>& from_config,
               double kappa, std::optional<long> m, std::optional<long> n,
               bool as_json, std::ostream& out) {
  CertificateMode mode = CertificateMode::benchmark;
  if (from_config) {
    const ExperimentPlan plan = load_plan(*from_config);
    if (!q) q = dagcusum::q(plan.noise, plan.scenario.theta, plan.scenario.tau);
    if (!m) m = plan.scenario.secure_len;
    if (!n) n = plan.topology.size();
    if (kappa <= 0.0 && plan.scenario.kappa) kappa = *plan.scenario.kappa;
  }
  if (!q) throw ConfigError("bounds: one of --q or --from-config is required");
  if (!m || !n) throw ConfigError("bounds: --m and --n are required");
  if (!(kappa > 0.0)) throw ConfigError("bounds: --kappa must be positive");
  const FalseAlarmCertificate c = make_certificate(*q, kappa, *m, *n, mode);
  out << (as_json ? c.to_json() + "\n" : c.to_text());
  if (!c.feasible) {
    throw InfeasibleMN("MN = " + std::to_string(*m * *n) +
                       " does not exceed ln2 / upsilon* = " +
                       format_double(c.mn_min));
  }
  return 0;
}

int cmd_topology_check(const std::string& path, const std::string& norm,
                       std::ostream& out) {
  const NetworkTopology topo = load_topology_file(path);
  out << "sensors           " << topo.size() << '\n'
      << "edges             " << topo.edges().size() << '\n'
      << "secure            " << topo.n_secure() << '\n'
      << "components        " << topo.component_count() << '\n';
  const WeightMatrix w =
      build_laplacian_weights(topo, normalization_from_name(norm));
  const ValidationReport r = validate_condition1(w.dense(), &topo);
  std::ostringstream s2;
  s2 << std::setprecision(10) << w.sigma2();
  out << "sigma2            " << s2.str() << '\n'
      << "condition1        " << (r.ok() ? "ok" : "violated") << '\n';
  for (const auto& f : r.failures) out << "  " << f << '\n';
  return r.ok() ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Quickest detection of data-injection attacks on one-bit sensor networks",
               "dagcusum"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo sweep");
  std::string config;
  std::optional<std::string> out_path, trace_dir;
  std::optional<std::uint64_t> seed;
  int parallel = 1;
  bool paper_scale = false;
  sim->add_option("--config", config, "Experiment config (JSON)")->required();
  sim->add_option("--out", out_path, "Output CSV");
  sim->add_option("--seed", seed, "Master seed override");
  sim->add_option("--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber);
  sim->add_flag("--paper-scale", paper_scale, "M = 5000, 2000 replications");
  sim->add_option("--trace-dir", trace_dir, "Write traces of replication 0");

  auto* bnd = app.add_subcommand("bounds", "False-alarm certificate");
  std::optional<double> q;
  std::optional<std::string> from_config;
  double kappa = 0.0;
  std::optional<long> m, n;
  bool as_json = false;
  auto* q_opt = bnd->add_option("--q", q, "Bit-0 probability q(theta)");
  auto* fc_opt = bnd->add_option("--from-config", from_config, "Take q, M, N from a config");
  q_opt->excludes(fc_opt);
  bnd->add_option("--kappa", kappa, "Target false-alarm period");
  bnd->add_option("--m", m, "Secure length M");
  bnd->add_option("--n", n, "Number of sensors N");
  bnd->add_flag("--json", as_json, "Print JSON");

  auto* topo = app.add_subcommand("topology-check", "Validate a topology file");
  std::string topo_path;
  topo->add_option("--topology", topo_path, "Topology file (JSON)")->required();
  std::string norm = "squared";
  topo->add_option("--normalization", norm, "Laplacian step: squared or linear")
      ->check(CLI::IsMember({"squared", "linear"}));

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    json_error(err, "UsageError", e.what());
    err << app.help();
    return 1;
  }

  try {
    if (*sim) {
      return cmd_simulate(config, out_path, seed, parallel, paper_scale, trace_dir,
                          out, err);
    }
    if (*bnd) return cmd_bounds(q, from_config, kappa, m, n, as_json, out);
    if (*topo) return cmd_topology_check(topo_path, norm, out);
  } catch (const InfeasibleMN& e) {
    json_error(err, e.kind(), e.what());
    return 2;
  } catch (const Error& e) {
    json_error(err, e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    json_error(err, "Error", e.what());
    return 1;
  }
  return 1;
}

}  // namespace dagcusum
