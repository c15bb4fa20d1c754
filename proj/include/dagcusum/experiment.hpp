#pragma once

#include "dagcusum/noise.hpp"
#include "dagcusum/signal.hpp"
#include "dagcusum/topology.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dagcusum {

enum class Detector { oracle, gcusum, alternative, dag };

/// "oracle-cusum", "gcusum", "alternative", "dag-cusum".
std::string detector_name(Detector d);
Detector detector_from_name(const std::string& name);

struct ExperimentPlan {
  ExperimentPlan(ScenarioConfig scenario, NetworkTopology topology);

  ScenarioConfig scenario;
  NetworkTopology topology;
  NoiseModel noise = NoiseModel::gaussian(1.0);
  std::vector<Detector> detectors{Detector::gcusum, Detector::dag};
  std::vector<double> h_grid;
  /// Per-detector grids; detectors not listed use h_grid.
  std::map<Detector, std::vector<double>> h_grids;
  int replications = 200;
  int horizon = 400;
  std::string output_path;
  WeightNormalization weight_normalization = WeightNormalization::squared;
  bool collapsed_warmup = false;
  bool eta3_times_n = false;
  bool clamp_mu = true;
  bool run_attacked = true;
  bool run_unattacked = true;
  /// Replication 0 writes bit and statistic traces here when set.
  std::optional<std::string> trace_dir;

  const std::vector<double>& grid_for(Detector d) const;
  /// Throws ConfigError with a field-level message.
  void validate() const;
};

/// One CSV row. `sensor` is "central" or a 1-based sensor id.
struct RunResult {
  std::string detector;
  std::string sensor;
  double h = 0.0;
  /// Mean stopping time of the unattacked runs, censored at the horizon.
  double false_alarm_period = 0.0;
  /// Mean of (T - t_a)^+ over the attacked runs.
  double mean_delay = 0.0;
  /// 1.96 sd / sqrt(n) of the delay samples.
  double delay_ci = 0.0;
  /// Fraction of unattacked runs that reached the horizon.
  double censored_frac = 0.0;
  int reps = 0;
  std::uint64_t seed = 0;

  bool operator==(const RunResult&) const = default;
};

struct ExperimentOutput {
  std::vector<RunResult> results;
  std::vector<std::string> warnings;
  /// Delay censoring per result row (same order as results).
  std::vector<double> delay_censored_frac;
  long degenerate_events = 0;
};

/// Runs every replication on `threads` workers and reduces in replication
/// order, so the output does not depend on the thread count.
ExperimentOutput run_experiment(const ExperimentPlan& plan, int threads = 1);

std::string results_csv(const std::vector<RunResult>& results);
void emit_csv(const std::string& path, const std::vector<RunResult>& results);
std::vector<RunResult> parse_csv(const std::string& text);

/// Rows of one detector/sensor curve, sorted by h.
std::vector<RunResult> curve(const std::vector<RunResult>& results,
                             const std::string& detector,
                             const std::string& sensor);

/// Count of adjacent grid points where the mean delay drops by more than the
/// sum of the two CI half-widths.
int significant_inversions(const std::vector<RunResult>& curve);
/// Count of adjacent grid points where the delay decreases while the
/// false-alarm period increases, beyond the CI half-widths.
int delay_vs_fa_inversions(const std::vector<RunResult>& curve);

/// (max - min) / mean of the DAG-CUSUM mean delays over sensors at grid
/// index `h_index`.
double cohesion_spread(const std::vector<RunResult>& results, int n_sensors,
                       std::size_t h_index);

struct DominanceCheck {
  int compared = 0;
  int violations = 0;
  /// Largest gcusum_delay - (dag_delay + dag_ci) seen.
  double worst_margin = 0.0;
};

/// Interpolates the reference delay curve in log false-alarm period at each
/// point of `other` inside the reference's range and checks
/// reference <= other + other.ci.
DominanceCheck check_dominance(const std::vector<RunResult>& reference,
                               const std::vector<RunResult>& other);

}  // namespace dagcusum
