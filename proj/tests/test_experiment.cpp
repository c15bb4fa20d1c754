#include "dagcusum/config.hpp"
#include "dagcusum/errors.hpp"
#include "dagcusum/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace dagcusum;

namespace {

NetworkTopology cycle4() {
  return NetworkTopology(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, {0});
}

ExperimentPlan small_plan() {
  ScenarioConfig sc;
  sc.mu.assign(4, 0.5);
  sc.secure_len = 100;
  sc.attack_time = 5;
  sc.master_seed = 77;
  ExperimentPlan p(sc, cycle4());
  p.detectors = {Detector::oracle, Detector::gcusum, Detector::alternative,
                 Detector::dag};
  p.h_grid = {2, 4, 8};
  p.replications = 12;
  p.horizon = 60;
  return p;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string p = ::testing::TempDir() + "/" + name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Experiment, DetectorNames) {
  for (Detector d : {Detector::oracle, Detector::gcusum, Detector::alternative,
                     Detector::dag}) {
    EXPECT_EQ(detector_from_name(detector_name(d)), d);
  }
  EXPECT_EQ(detector_name(Detector::dag), "dag-cusum");
  EXPECT_THROW(detector_from_name("page"), ConfigError);
}

TEST(Experiment, CsvRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  std::vector<RunResult> rs;
  for (int i = 0; i < 50; ++i) {
    RunResult r;
    r.detector = i % 2 ? "gcusum" : "dag-cusum";
    r.sensor = i % 2 ? "central" : std::to_string(1 + i % 12);
    r.h = u(rng);
    r.false_alarm_period = u(rng);
    r.mean_delay = u(rng) / 3.0;
    r.delay_ci = u(rng) * 1e-7;
    r.censored_frac = u(rng) / 1000.0;
    r.reps = 1 + i;
    r.seed = rng();
    rs.push_back(r);
  }
  EXPECT_EQ(parse_csv(results_csv(rs)), rs);
}

TEST(Experiment, EmptyResultsGiveHeaderOnly) {
  const std::string dir = ::testing::TempDir() + "/nested/dir";
  std::filesystem::remove_all(dir);
  emit_csv(dir + "/out.csv", {});
  std::ifstream in(dir + "/out.csv");
  std::string all((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(all,
            "detector,sensor,h,false_alarm_period,mean_delay,delay_ci,"
            "censored_frac,reps,seed\n");
  EXPECT_TRUE(parse_csv(all).empty());
  EXPECT_THROW(parse_csv("nope\n"), ConfigError);
  EXPECT_THROW(parse_csv(all + "a,b,c\n"), ConfigError);
}

TEST(Experiment, OutputIndependentOfThreadCount) {
  const auto p = small_plan();
  const auto a = run_experiment(p, 1);
  const auto b = run_experiment(p, 8);
  EXPECT_EQ(a.results, b.results);
  EXPECT_EQ(a.degenerate_events, b.degenerate_events);
  // oracle + gcusum + alternative central rows, 4 DAG sensors, 3 thresholds.
  EXPECT_EQ(a.results.size(), (3u + 4u) * 3u);
}

TEST(Experiment, DegenerateHorizonAndThreshold) {
  auto p = small_plan();
  p.horizon = 1;
  p.h_grid = {-1e9};
  const auto out = run_experiment(p, 2);
  for (const auto& r : out.results) {
    EXPECT_DOUBLE_EQ(r.false_alarm_period, 1.0) << r.detector;
    EXPECT_DOUBLE_EQ(r.mean_delay, 0.0);
  }
}

TEST(Experiment, StrongAttackOracleDetectsQuickly) {
  auto p = small_plan();
  p.detectors = {Detector::oracle};
  p.scenario.mu.assign(4, 3.0);
  p.h_grid = {5.0};
  p.replications = 50;
  p.run_unattacked = false;
  const auto out = run_experiment(p, 1);
  ASSERT_EQ(out.results.size(), 1u);
  EXPECT_LT(out.results[0].mean_delay, 10.0);
}

TEST(Experiment, DelayGrowsWithThreshold) {
  auto p = small_plan();
  p.detectors = {Detector::gcusum};
  p.h_grid = {2, 10, 30};
  p.replications = 40;
  p.horizon = 200;
  const auto out = run_experiment(p, 2);
  const auto c = curve(out.results, "gcusum", "central");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_LE(c[0].mean_delay, c[2].mean_delay);
  EXPECT_LE(c[0].false_alarm_period, c[2].false_alarm_period);
  EXPECT_EQ(significant_inversions(c), 0);
}

TEST(Experiment, CurveHelpers) {
  auto mk = [](double h, double fa, double d, double ci) {
    RunResult r;
    r.detector = "x";
    r.sensor = "central";
    r.h = h;
    r.false_alarm_period = fa;
    r.mean_delay = d;
    r.delay_ci = ci;
    return r;
  };
  const std::vector<RunResult> c{mk(1, 10, 5, 0.1), mk(2, 20, 3, 0.1),
                                 mk(3, 30, 6, 0.1)};
  EXPECT_EQ(significant_inversions(c), 1);
  EXPECT_EQ(delay_vs_fa_inversions(c), 1);
  const std::vector<RunResult> ref{mk(1, 10, 4, 0.1), mk(2, 100, 8, 0.1)};
  const std::vector<RunResult> other{mk(1, 10, 5, 0.5), mk(2, 31.6227766, 5, 0.5),
                                     mk(3, 1000, 1, 0.1)};
  const auto d = check_dominance(ref, other);
  EXPECT_EQ(d.compared, 2);
  // At FA = 10^1.5 the reference interpolates to 6 > 5 + 0.5.
  EXPECT_EQ(d.violations, 1);
  EXPECT_NEAR(d.worst_margin, 0.5, 1e-6);
}

TEST(Experiment, CohesionSpread) {
  std::vector<RunResult> rs;
  for (int j = 1; j <= 3; ++j) {
    RunResult r;
    r.detector = "dag-cusum";
    r.sensor = std::to_string(j);
    r.h = 1.0;
    r.mean_delay = 9.0 + j;
    rs.push_back(r);
  }
  EXPECT_NEAR(cohesion_spread(rs, 3, 0), 2.0 / 11.0, 1e-12);
}

TEST(Experiment, PlanValidation) {
  auto p = small_plan();
  p.replications = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = small_plan();
  p.h_grid = {3, 2};
  EXPECT_THROW(p.validate(), ConfigError);
  p = small_plan();
  p.detectors = {Detector::dag, Detector::dag};
  EXPECT_THROW(p.validate(), ConfigError);
  p = small_plan();
  p.run_attacked = p.run_unattacked = false;
  EXPECT_THROW(p.validate(), ConfigError);
  p = small_plan();
  p.h_grids[Detector::dag] = {0.5};
  EXPECT_EQ(p.grid_for(Detector::dag), std::vector<double>{0.5});
  EXPECT_EQ(p.grid_for(Detector::gcusum), p.h_grid);
}

TEST(Config, ParsesFullPlan) {
  write_temp(
      "c4.json", R"({"n_sensors": 4, "edges": [[1,2],[2,3],[3,4],[4,1]], "secure": [1]})");
  const std::string text = R"({
    "topology": "c4.json", "theta": 1.0, "tau": 1.0, "b": 0.18,
    "mu": {"2": 0.3, "3": 0.4, "4": 0.5}, "secure_len": 50, "q_rounds": 2,
    "detectors": ["gcusum", "dag-cusum"], "h_grid": [1, 2],
    "h_grids": {"dag-cusum": [0.5]}, "replications": 3, "horizon": 10,
    "noise": {"family": "gaussian", "scale": 2.0}})";
  auto p = parse_plan(text, ::testing::TempDir());
  EXPECT_EQ(p.topology.size(), 4);
  EXPECT_DOUBLE_EQ(p.scenario.mu[3], 0.5);
  EXPECT_EQ(p.grid_for(Detector::dag), std::vector<double>{0.5});
  EXPECT_EQ(p.replications, 3);
  apply_paper_scale(p);
  EXPECT_EQ(p.scenario.secure_len, 5000);
  EXPECT_EQ(p.replications, 2000);
}

TEST(Config, RejectsBadInput) {
  const std::string topo =
      R"("topology": {"n_sensors": 2, "edges": [[1,2]], "secure": []})";
  auto bad = [&](const std::string& body) {
    return "{" + topo + ", \"h_grid\": [1], " + body + "}";
  };
  EXPECT_NO_THROW(parse_plan(bad(R"("mu": 0.3)")));
  EXPECT_THROW(parse_plan(bad(R"("mu": 0.1)")), ConfigError);  // below b
  EXPECT_THROW(parse_plan(bad(R"("mu": 0.3, "colour": 1)")), ConfigError);
  EXPECT_THROW(parse_plan(bad(R"("mu": [0.3])")), ConfigError);
  EXPECT_THROW(parse_plan(bad(R"("mu": 0.3, "replications": "many")")),
               ConfigError);
  EXPECT_THROW(parse_plan("{not json"), ConfigError);
  EXPECT_THROW(parse_plan(R"({"topology": "missing.json", "mu": 0.3})"),
               IoError);
  try {
    parse_plan(bad(R"("mu": 0.3, "colour": 1)"));
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
  }
}

TEST(Config, DeskConfigLoads) {
  const auto p = load_plan(std::string(DAGCUSUM_SOURCE_DIR) + "/configs/desk.json");
  EXPECT_EQ(p.topology.size(), 12);
  EXPECT_NO_THROW(p.validate());
}
