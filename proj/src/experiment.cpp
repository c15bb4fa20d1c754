#include "dagcusum/experiment.hpp"

#include "dagcusum/centralized.hpp"
#include "dagcusum/consensus.hpp"
#include "dagcusum/dag_cusum.hpp"
#include "dagcusum/errors.hpp"
#include "dagcusum/format.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace dagcusum {

std::string detector_name(Detector d) {
  switch (d) {
    case Detector::oracle: return "oracle-cusum";
    case Detector::gcusum: return "gcusum";
    case Detector::alternative: return "alternative";
    case Detector::dag: return "dag-cusum";
  }
  return "?";
}

Detector detector_from_name(const std::string& name) {
  if (name == "oracle-cusum") return Detector::oracle;
  if (name == "gcusum") return Detector::gcusum;
  if (name == "alternative") return Detector::alternative;
  if (name == "dag-cusum") return Detector::dag;
  throw ConfigError("unknown detector '" + name +
                    "' (expected oracle-cusum, gcusum, alternative or "
                    "dag-cusum)");
}

ExperimentPlan::ExperimentPlan(ScenarioConfig s, NetworkTopology t)
    : scenario(std::move(s)), topology(std::move(t)) {}

const std::vector<double>& ExperimentPlan::grid_for(Detector d) const {
  auto it = h_grids.find(d);
  return it == h_grids.end() ? h_grid : it->second;
}

void ExperimentPlan::validate() const {
  scenario.validate(topology);
  if (detectors.empty()) throw ConfigError("detectors: list is empty");
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    for (std::size_t k = i + 1; k < detectors.size(); ++k) {
      if (detectors[i] == detectors[k]) {
        throw ConfigError("detectors: '" + detector_name(detectors[i]) +
                          "' listed twice");
      }
    }
  }
  for (Detector d : detectors) {
    const auto& g = grid_for(d);
    const std::string field =
        h_grids.count(d) ? "h_grids." + detector_name(d) : "h_grid";
    if (g.empty()) throw ConfigError(field + ": no thresholds");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (std::isnan(g[i])) throw ConfigError(field + ": NaN threshold");
      if (i > 0 && !(g[i] > g[i - 1])) {
        throw ConfigError(field + ": must be strictly increasing (entry " +
                          std::to_string(i + 1) + ")");
      }
    }
  }
  if (replications < 1) {
    throw ConfigError("replications must be >= 1, got " +
                      std::to_string(replications));
  }
  if (horizon < 1) {
    throw ConfigError("horizon must be >= 1, got " + std::to_string(horizon));
  }
  const bool needs_dag =
      std::find(detectors.begin(), detectors.end(), Detector::dag) !=
      detectors.end();
  if (needs_dag && topology.size() >= 2 && !topology.is_connected()) {
    throw ConfigError("topology: dag-cusum needs a connected graph (" +
                      std::to_string(topology.component_count()) +
                      " components)");
  }
  if (!run_attacked && !run_unattacked) {
    throw ConfigError("nothing to run: attacked and unattacked both off");
  }
}

namespace {

struct Slot {
  Detector detector;
  int sensor;  // -1 for central
};

// First crossing time per threshold; 0 while not crossed.
struct Crossings {
  std::vector<int> T;
  std::size_t next = 0;

  explicit Crossings(std::size_t n) : T(n, 0) {}
  bool done() const { return next == T.size(); }
  void feed(const std::vector<double>& grid, double stat, int K) {
    while (next < grid.size() && stat >= grid[next]) T[next++] = K;
  }
};

struct RunTimes {
  std::vector<std::vector<int>> T;  // [slot][h]
  long degenerate = 0;
};

class Runner {
 public:
  explicit Runner(const ExperimentPlan& plan) : plan_(plan) {
    for (Detector d : {Detector::oracle, Detector::gcusum,
                       Detector::alternative, Detector::dag}) {
      if (std::find(plan.detectors.begin(), plan.detectors.end(), d) ==
          plan.detectors.end()) {
        continue;
      }
      if (d == Detector::dag) {
        for (int j = 0; j < plan.topology.size(); ++j) slots_.push_back({d, j});
      } else {
        slots_.push_back({d, -1});
      }
    }
    if (has(Detector::dag)) {
      const WeightMatrix w = plan.topology.size() == 1
                                 ? WeightMatrix(Eigen::MatrixXd::Ones(1, 1))
                                 : build_laplacian_weights(plan.topology,
                                                           plan.weight_normalization);
      matrices_ = ConsensusMatrices::uniform(w);
    }
  }

  const std::vector<Slot>& slots() const { return slots_; }

  bool has(Detector d) const {
    return std::any_of(slots_.begin(), slots_.end(),
                       [&](const Slot& s) { return s.detector == d; });
  }

  RunTimes run(const BitHistory& bits, bool write_traces) const {
    const auto& sc = plan_.scenario;
    const auto& topo = plan_.topology;
    std::vector<Crossings> cross;
    for (const Slot& s : slots_) cross.emplace_back(plan_.grid_for(s.detector).size());
    RunTimes out;

    auto slot_index = [&](Detector d, int sensor) {
      for (std::size_t i = 0; i < slots_.size(); ++i) {
        if (slots_[i].detector == d && slots_[i].sensor == sensor) return int(i);
      }
      return -1;
    };
    const int i_oracle = slot_index(Detector::oracle, -1);
    const int i_g = slot_index(Detector::gcusum, -1);
    const int i_a = slot_index(Detector::alternative, -1);
    const int i_dag0 = slot_index(Detector::dag, 0);

    std::optional<OracleCusum> oracle;
    if (i_oracle >= 0) oracle.emplace(topo, plan_.noise, sc.tau, sc.theta, sc.mu);
    std::optional<CentralizedMonitor> central;
    if (i_g >= 0 || i_a >= 0) {
      central.emplace(topo, plan_.noise, sc.tau, sc.b, bits,
                      CentralizedOptions{plan_.clamp_mu});
    }
    std::optional<DagCusumNetwork> dag;
    if (i_dag0 >= 0) {
      DagOptions o;
      o.alpha = sc.alpha;
      o.collapsed_warmup = plan_.collapsed_warmup;
      o.eta3_times_n = plan_.eta3_times_n;
      dag.emplace(topo, matrices_, sc.q_rounds, plan_.noise, sc.b,
                  sc.secure_len, o);
      dag->warm_up(bits);
    }

    std::vector<DagTraceRow> dag_rows;
    std::vector<CentralizedTraceRow> central_rows;
    const int N = topo.size();

    for (int K = 1; K <= plan_.horizon; ++K) {
      const auto row = bits.monitor_row(K);
      bool all_done = true;
      if (oracle) {
        oracle->step(row);
        cross[i_oracle].feed(plan_.grid_for(Detector::oracle),
                             oracle->statistic(), K);
      }
      const bool central_live =
          central && ((i_g >= 0 && !cross[i_g].done()) ||
                      (i_a >= 0 && !cross[i_a].done()) || write_traces);
      if (central_live) {
        central->push(row);
        try {
          const CentralizedResult r = central->evaluate();
          if (i_g >= 0) cross[i_g].feed(plan_.grid_for(Detector::gcusum), r.H_G, K);
          if (i_a >= 0) {
            cross[i_a].feed(plan_.grid_for(Detector::alternative), r.H_A, K);
          }
          if (write_traces) central_rows.push_back({K, r.H_G, r.H_A, r.k_hat});
        } catch (const DegenerateBits&) {
          ++out.degenerate;
        }
      }
      if (dag) {
        bool dag_live = write_traces;
        for (int j = 0; j < N; ++j) dag_live = dag_live || !cross[i_dag0 + j].done();
        if (dag_live) {
          dag->step(row);
          const auto& grid = plan_.grid_for(Detector::dag);
          for (int j = 0; j < N; ++j) cross[i_dag0 + j].feed(grid, dag->sensor(j).H, K);
          if (write_traces) dag->append_trace(dag_rows);
        }
      }
      for (const auto& c : cross) all_done = all_done && c.done();
      if (all_done && !write_traces) break;
    }
    if (dag) out.degenerate += dag->degenerate_events();

    if (write_traces) {
      namespace fs = std::filesystem;
      const fs::path dir(*plan_.trace_dir);
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw IoError("cannot create trace directory '" + dir.string() + "'");
      write_bit_trace((dir / "bits_rep0.csv").string(), bits);
      if (dag) write_dag_trace((dir / "dag_trace_rep0.csv").string(), dag_rows);
      if (central) {
        write_centralized_trace((dir / "centralized_trace_rep0.csv").string(),
                                central_rows);
      }
    }
    for (auto& c : cross) out.T.push_back(std::move(c.T));
    return out;
  }

 private:
  const ExperimentPlan& plan_;
  std::vector<Slot> slots_;
  ConsensusMatrices matrices_;
};

struct RepOutcome {
  RunTimes attacked;
  RunTimes unattacked;
};

}  // namespace

ExperimentOutput run_experiment(const ExperimentPlan& plan, int threads) {
  plan.validate();
  if (threads < 1) throw ConfigError("parallel must be >= 1");
  const Runner runner(plan);
  ExperimentOutput out;

  if (runner.has(Detector::gcusum) || runner.has(Detector::alternative)) {
    const double cost = 0.5 * double(plan.horizon) * plan.horizon *
                        std::max(1, plan.topology.n_insecure()) *
                        plan.replications *
                        ((plan.run_attacked ? 1 : 0) + (plan.run_unattacked ? 1 : 0));
    if (cost > 2e10) {
      out.warnings.push_back(
          "gcusum: horizon " + std::to_string(plan.horizon) +
          " costs about " + format_double(std::round(cost / 1e9)) +
          "e9 table lookups per sweep");
    }
  }

  std::vector<RepOutcome> reps(static_cast<std::size_t>(plan.replications));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= plan.replications) return;
      try {
        RepOutcome& o = reps[static_cast<std::size_t>(r)];
        if (plan.run_attacked) {
          const BitHistory h = generate_history(plan.scenario, plan.noise,
                                                plan.topology, r, plan.horizon,
                                                true);
          o.attacked = runner.run(h, r == 0 && plan.trace_dir.has_value());
        }
        if (plan.run_unattacked) {
          const BitHistory h = generate_history(plan.scenario, plan.noise,
                                                plan.topology, r, plan.horizon,
                                                false);
          o.unattacked = runner.run(h, false);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(plan.replications);
        return;
      }
    }
  };

  const int n_threads = std::min(threads, plan.replications);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  const double t_a = plan.scenario.attack_time;
  const int n = plan.replications;
  const auto& slots = runner.slots();
  for (const auto& rep : reps) {
    out.degenerate_events += rep.attacked.degenerate + rep.unattacked.degenerate;
  }
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const auto& grid = plan.grid_for(slots[s].detector);
    for (std::size_t hi = 0; hi < grid.size(); ++hi) {
      RunResult r;
      r.detector = detector_name(slots[s].detector);
      r.sensor = slots[s].sensor < 0 ? "central"
                                     : std::to_string(slots[s].sensor + 1);
      r.h = grid[hi];
      r.reps = n;
      r.seed = plan.scenario.master_seed;
      double delay_censored = std::nan("");
      if (plan.run_attacked) {
        double sum = 0.0, sum2 = 0.0;
        int censored = 0;
        for (const auto& rep : reps) {
          int T = rep.attacked.T[s][hi];
          if (T == 0) {
            T = plan.horizon;
            ++censored;
          }
          const double d = std::max(0.0, T - t_a);
          sum += d;
          sum2 += d * d;
        }
        r.mean_delay = sum / n;
        const double var =
            n > 1 ? std::max(0.0, (sum2 - n * r.mean_delay * r.mean_delay) / (n - 1))
                  : 0.0;
        r.delay_ci = 1.96 * std::sqrt(var / n);
        delay_censored = double(censored) / n;
      } else {
        r.mean_delay = r.delay_ci = std::nan("");
      }
      if (plan.run_unattacked) {
        double sum = 0.0;
        int censored = 0;
        for (const auto& rep : reps) {
          int T = rep.unattacked.T[s][hi];
          if (T == 0) {
            T = plan.horizon;
            ++censored;
          }
          sum += T;
        }
        r.false_alarm_period = sum / n;
        r.censored_frac = double(censored) / n;
      } else {
        r.false_alarm_period = r.censored_frac = std::nan("");
      }
      out.results.push_back(std::move(r));
      out.delay_censored_frac.push_back(delay_censored);
    }
  }
  return out;
}

std::string results_csv(const std::vector<RunResult>& results) {
  std::string s =
      "detector,sensor,h,false_alarm_period,mean_delay,delay_ci,censored_frac,"
      "reps,seed\n";
  for (const auto& r : results) {
    s += r.detector + ',' + r.sensor + ',' + format_double(r.h) + ',' +
         format_double(r.false_alarm_period) + ',' +
         format_double(r.mean_delay) + ',' + format_double(r.delay_ci) + ',' +
         format_double(r.censored_frac) + ',' + std::to_string(r.reps) + ',' +
         std::to_string(r.seed) + '\n';
  }
  return s;
}

void emit_csv(const std::string& path, const std::vector<RunResult>& results) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory '" + p.parent_path().string() +
                    "': " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << results_csv(results);
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<RunResult> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "detector,sensor,h,false_alarm_period,mean_delay,delay_ci,"
              "censored_frac,reps,seed") {
    throw ConfigError("results CSV: missing or wrong header");
  }
  std::vector<RunResult> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 9) {
      throw ConfigError("results CSV line " + std::to_string(line_no) +
                        ": expected 9 fields, got " + std::to_string(f.size()));
    }
    RunResult r;
    r.detector = f[0];
    r.sensor = f[1];
    r.h = parse_double(f[2]);
    r.false_alarm_period = parse_double(f[3]);
    r.mean_delay = parse_double(f[4]);
    r.delay_ci = parse_double(f[5]);
    r.censored_frac = parse_double(f[6]);
    try {
      std::size_t pos = 0;
      r.reps = std::stoi(f[7], &pos);
      if (pos != f[7].size()) throw std::invalid_argument("reps");
      r.seed = std::stoull(f[8], &pos);
      if (pos != f[8].size()) throw std::invalid_argument("seed");
    } catch (const std::exception&) {
      throw ConfigError("results CSV line " + std::to_string(line_no) +
                        ": bad integer field");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunResult> curve(const std::vector<RunResult>& results,
                             const std::string& detector,
                             const std::string& sensor) {
  std::vector<RunResult> c;
  for (const auto& r : results) {
    if (r.detector == detector && r.sensor == sensor) c.push_back(r);
  }
  std::sort(c.begin(), c.end(),
            [](const RunResult& a, const RunResult& b) { return a.h < b.h; });
  return c;
}

int significant_inversions(const std::vector<RunResult>& c) {
  int bad = 0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i].mean_delay < c[i - 1].mean_delay - c[i].delay_ci - c[i - 1].delay_ci) {
      ++bad;
    }
  }
  return bad;
}

int delay_vs_fa_inversions(const std::vector<RunResult>& c) {
  std::vector<RunResult> s = c;
  std::sort(s.begin(), s.end(), [](const RunResult& a, const RunResult& b) {
    return a.false_alarm_period < b.false_alarm_period;
  });
  return significant_inversions(s);
}

double cohesion_spread(const std::vector<RunResult>& results, int n_sensors,
                       std::size_t h_index) {
  double lo = HUGE_VAL, hi = -HUGE_VAL, sum = 0.0;
  for (int j = 1; j <= n_sensors; ++j) {
    const auto c = curve(results, "dag-cusum", std::to_string(j));
    if (h_index >= c.size()) {
      throw DimensionMismatch("no dag-cusum row for sensor " + std::to_string(j));
    }
    const double d = c[h_index].mean_delay;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    sum += d;
  }
  const double mean = sum / n_sensors;
  return mean > 0.0 ? (hi - lo) / mean : 0.0;
}

DominanceCheck check_dominance(const std::vector<RunResult>& reference,
                               const std::vector<RunResult>& other) {
  std::vector<RunResult> ref = reference;
  std::sort(ref.begin(), ref.end(), [](const RunResult& a, const RunResult& b) {
    return a.false_alarm_period < b.false_alarm_period;
  });
  DominanceCheck out;
  out.worst_margin = -HUGE_VAL;
  if (ref.empty()) return out;
  for (const auto& o : other) {
    const double x = std::log(o.false_alarm_period);
    for (std::size_t i = 0; i + 1 < ref.size() || i == 0; ++i) {
      double y;
      if (ref.size() == 1) {
        if (ref[0].false_alarm_period != o.false_alarm_period) break;
        y = ref[0].mean_delay;
      } else {
        const double x0 = std::log(ref[i].false_alarm_period);
        const double x1 = std::log(ref[i + 1].false_alarm_period);
        if (x < x0 || x > x1) continue;
        const double t = x1 > x0 ? (x - x0) / (x1 - x0) : 0.0;
        y = ref[i].mean_delay + t * (ref[i + 1].mean_delay - ref[i].mean_delay);
      }
      ++out.compared;
      const double margin = y - (o.mean_delay + o.delay_ci);
      out.worst_margin = std::max(out.worst_margin, margin);
      if (margin > 0.0) ++out.violations;
      break;
    }
  }
  return out;
}

}  // namespace dagcusum
