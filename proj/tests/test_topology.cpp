#include "dagcusum/errors.hpp"
#include "dagcusum/topology.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dagcusum;

namespace {

NetworkTopology cycle4() {
  return NetworkTopology::from_one_based(4, {{1, 2}, {2, 3}, {3, 4}, {4, 1}}, {1});
}

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& a, int n) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  for (int i = 0; i < n; ++i) r = r * a;
  return r;
}

// Connected random graph: a random spanning tree plus extra edges.
NetworkTopology random_connected(int n, std::mt19937_64& rng) {
  std::vector<NetworkTopology::Edge> e;
  for (int v = 1; v < n; ++v) {
    e.emplace_back(std::uniform_int_distribution<int>(0, v - 1)(rng), v);
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int i = 0; i < n; ++i) {
    int a = pick(rng), b = pick(rng);
    if (a != b) e.emplace_back(a, b);
  }
  return NetworkTopology(n, e, {});
}

}  // namespace

TEST(Topology, CycleWeightsMatchHandComputedMatrix) {
  const WeightMatrix w = build_laplacian_weights(cycle4());
  Eigen::MatrixXd expected(4, 4);
  expected << 0.8, 0.1, 0.0, 0.1,
              0.1, 0.8, 0.1, 0.0,
              0.0, 0.1, 0.8, 0.1,
              0.1, 0.0, 0.1, 0.8;
  EXPECT_LT((w.dense() - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(w.sigma2(), 0.8, 1e-12);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.dense());
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + 4);
  std::sort(ev.begin(), ev.end());
  EXPECT_NEAR(ev[0], 0.6, 1e-12);
  EXPECT_NEAR(ev[1], 0.8, 1e-12);
  EXPECT_NEAR(ev[2], 0.8, 1e-12);
  EXPECT_NEAR(ev[3], 1.0, 1e-12);
}

TEST(Topology, CompleteGraphOnTwoNodesUsesSameNormalization) {
  // L = [[1,-1],[-1,1]] has singular values {2, 0}; sigma_1 = sigma_{N-1} = 2.
  const auto k2 = NetworkTopology::from_one_based(2, {{1, 2}}, {});
  const WeightMatrix w = build_laplacian_weights(k2);
  Eigen::MatrixXd expected(2, 2);
  expected << 0.75, 0.25, 0.25, 0.75;
  EXPECT_LT((w.dense() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(w.sigma2(), 0.5, 1e-12);
}

TEST(Topology, DisconnectedGraphIsRejectedBeforeSpectralWork) {
  const auto g = NetworkTopology::from_one_based(4, {{1, 2}, {3, 4}}, {});
  EXPECT_EQ(g.component_count(), 2);
  EXPECT_THROW(build_laplacian_weights(g), DisconnectedGraph);
}

TEST(Topology, SingleSensorCannotBuildLaplacianWeights) {
  EXPECT_THROW(build_laplacian_weights(NetworkTopology(1, {}, {})),
               SpectralGapViolation);
}

TEST(Topology, PathWeightsAreDoublyStochasticAndSymmetric) {
  const auto p = NetworkTopology::from_one_based(3, {{1, 2}, {2, 3}}, {});
  const WeightMatrix w = build_laplacian_weights(p);
  const auto r = validate_condition1(w.dense(), &p);
  EXPECT_TRUE(r.ok());
  EXPECT_LT((w.dense() - w.dense().transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Topology, InvalidEdgesAndSecureSets) {
  EXPECT_THROW(NetworkTopology(3, {{0, 0}}, {}), InvalidTopology);
  EXPECT_THROW(NetworkTopology(3, {{0, 3}}, {}), InvalidTopology);
  EXPECT_THROW(NetworkTopology(3, {{0, 1}}, {5}), InvalidTopology);
  EXPECT_THROW(NetworkTopology(3, {{0, 1}}, {1, 1}), InvalidTopology);
  EXPECT_THROW(NetworkTopology(0, {}, {}), InvalidTopology);
  const NetworkTopology t(3, {{1, 0}, {0, 1}, {2, 1}}, {2});
  EXPECT_EQ(t.edges().size(), 2u);
  EXPECT_EQ(t.insecure(), (std::vector<int>{0, 1}));
  EXPECT_EQ(t.secure(), (std::vector<int>{2}));
}

TEST(Topology, ValidationReportsEachFailure) {
  const auto c = cycle4();
  const WeightMatrix w = build_laplacian_weights(c);
  const auto ok = validate_condition1(w.dense(), &c);
  EXPECT_TRUE(ok.ok());
  EXPECT_NEAR(ok.sigma2, 0.8, 1e-12);

  const auto id = validate_condition1(Eigen::MatrixXd::Identity(4, 4));
  EXPECT_FALSE(id.spectral_gap);
  EXPECT_NEAR(id.sigma2, 1.0, 1e-15);

  Eigen::MatrixXd bad = w.dense();
  bad(0, 0) -= 1e-6;
  const auto r = validate_condition1(bad, &c);
  EXPECT_FALSE(r.row_stochastic);
  EXPECT_FALSE(r.column_stochastic);
  EXPECT_FALSE(r.ok());

  Eigen::MatrixXd off = w.dense();
  off(0, 2) = 0.05;
  off(0, 0) -= 0.05;
  off(2, 0) = 0.05;
  off(2, 2) -= 0.05;
  const auto s = validate_condition1(off, &c);
  EXPECT_FALSE(s.sparsity);
}

TEST(Topology, AveragingMatrixHasZeroSigma2) {
  EXPECT_NEAR(sigma2(averaging_matrix(5)), 0.0, 1e-12);
}

TEST(Topology, Sigma2EqualsNormOfDeviationFromAverage) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const auto g = random_connected(3 + t, rng);
    const WeightMatrix w = build_laplacian_weights(g);
    const Eigen::MatrixXd d = w.dense() - averaging_matrix(g.size());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
    EXPECT_NEAR(svd.singularValues()(0), w.sigma2(), 1e-9);
  }
}

TEST(Topology, PowerIdentityAndContraction) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < 5; ++t) {
    const auto g = random_connected(6 + t, rng);
    const WeightMatrix w = build_laplacian_weights(g);
    const Eigen::MatrixXd J = averaging_matrix(g.size());
    for (int n : {1, 5, 20}) {
      const Eigen::MatrixXd lhs = matrix_power(w.dense(), n) - J;
      const Eigen::MatrixXd rhs = matrix_power(w.dense() - J, n);
      EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
      Eigen::VectorXd v(g.size());
      for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
      v.normalize();
      EXPECT_LE((lhs * v).norm(), std::pow(w.sigma2(), n) + 1e-12);
    }
  }
}

TEST(Topology, ApplyRoundsMatchesDensePower) {
  const WeightMatrix w = build_laplacian_weights(cycle4());
  Eigen::VectorXd v(4);
  v << 1, 0, 3, -2;
  const Eigen::VectorXd expected = matrix_power(w.dense(), 7) * v;
  w.apply_rounds(v, 7);
  EXPECT_LT((v - expected).cwiseAbs().maxCoeff(), 1e-14);
  Eigen::VectorXd wrong(3);
  EXPECT_THROW(w.apply_rounds(wrong, 1), DimensionMismatch);
}

TEST(Topology, JsonRoundTripIsOneBased) {
  const auto c = cycle4();
  const std::string text = topology_to_json(c);
  const auto back = parse_topology_json(text);
  EXPECT_EQ(back.size(), 4);
  EXPECT_EQ(back.edges(), c.edges());
  EXPECT_EQ(back.secure(), std::vector<int>{0});
  EXPECT_NE(text.find("[1,2]"), std::string::npos);
  EXPECT_THROW(parse_topology_json("{\"n_sensors\": 3, \"edges\": [[1, 4]]}"),
               InvalidTopology);
  EXPECT_THROW(parse_topology_json("{\"edges\": []}"), ConfigError);
  EXPECT_THROW(parse_topology_json("not json"), ConfigError);
}

TEST(Topology, ShippedNetworksAreValid) {
  for (const char* f : {"cycle4.json", "net12.json"}) {
    const auto t = load_topology_file(std::string(DAGCUSUM_SOURCE_DIR) +
                                      "/data/topologies/" + f);
    const WeightMatrix w = build_laplacian_weights(t);
    EXPECT_TRUE(validate_condition1(w.dense(), &t).ok()) << f;
  }
  EXPECT_THROW(load_topology_file("/nonexistent/topology.json"), IoError);
}

TEST(Topology, LinearNormalization) {
  const WeightMatrix w =
      build_laplacian_weights(cycle4(), WeightNormalization::linear);
  // Laplacian eigenvalues {0, 2, 2, 4}: c = 2 / (4 + 2), W eigenvalues
  // {1, 1/3, 1/3, -1/3}.
  const Eigen::MatrixXd expected =
      Eigen::MatrixXd::Identity(4, 4) - cycle4().laplacian() / 3.0;
  EXPECT_LT((w.dense() - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(w.sigma2(), 1.0 / 3.0, 1e-12);

  // On K2 the linear step gives W = J exactly.
  const NetworkTopology k2(2, {{0, 1}}, {});
  EXPECT_THROW(build_laplacian_weights(k2, WeightNormalization::linear),
               SpectralGapViolation);

  const auto net12 = load_topology_file(std::string(DAGCUSUM_SOURCE_DIR) +
                                        "/data/topologies/net12.json");
  EXPECT_NEAR(build_laplacian_weights(net12, WeightNormalization::linear)
                  .sigma2(),
              0.6511, 5e-5);
  EXPECT_NEAR(build_laplacian_weights(net12).sigma2(), 0.94957, 5e-5);
  EXPECT_EQ(normalization_from_name("linear"), WeightNormalization::linear);
  EXPECT_EQ(normalization_name(WeightNormalization::squared), "squared");
  EXPECT_THROW(normalization_from_name("cubic"), ConfigError);
}
