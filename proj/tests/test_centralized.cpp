#include "dagcusum/centralized.hpp"
#include "dagcusum/errors.hpp"
#include "dagcusum/signal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

using namespace dagcusum;

namespace {

BitHistory random_bits(int n, int m, int horizon, double p_one,
                       std::mt19937_64& rng) {
  std::bernoulli_distribution b(p_one);
  BitHistory h(n, m, horizon);
  for (int i = 1; i <= m; ++i) {
    for (int j = 0; j < n; ++j) h.set_secure(i, j, b(rng));
  }
  for (int i = 1; i <= horizon; ++i) {
    for (int j = 0; j < n; ++j) h.set_monitor(i, j, b(rng));
  }
  return h;
}

// ln P(u) for a Bernoulli with P(0) = p0, with 0 ln 0 = 0 for outcomes that
// never occur at the limit.
double log_prob(int u, double p0) {
  return u ? std::log(1.0 - p0) : std::log(p0);
}

// Lambda_G^(k,K) bit by bit: f1 at theta_hat_a and per-sensor window shifts
// against f0 at the pooled MLE.
double lambda_oracle(const BitHistory& h, const NetworkTopology& t, int K,
                     int k, const NoiseModel& noise, double tau, double b,
                     bool clamp) {
  long ones_M = 0, ones_S = 0, ones_N = 0;
  for (int m = 1; m <= h.secure_len(); ++m) {
    for (int j = 0; j < t.size(); ++j) ones_M += h.secure(m, j);
  }
  for (int i = 1; i <= K; ++i) {
    for (int j = 0; j < t.size(); ++j) {
      ones_N += h.monitor(i, j);
      if (t.is_secure(j)) ones_S += h.monitor(i, j);
    }
  }
  const double MN = double(h.secure_len()) * t.size();
  const double p_u = (ones_M + ones_N) / (MN + double(K) * t.size());
  const double p_a = (ones_M + ones_S) / (MN + double(K) * t.n_secure());
  const double theta_mle = tau - noise.quantile(1.0 - p_u);
  const double theta_a = tau - noise.quantile(1.0 - p_a);
  const double q0 = noise.cdf(tau - theta_mle);
  const double qa = noise.cdf(tau - theta_a);
  const double qb = noise.cdf(tau - theta_a - b);

  double r = 0.0;
  auto both = [&](int u, double p1_zero) {
    r += log_prob(u, p1_zero) - log_prob(u, q0);
  };
  for (int m = 1; m <= h.secure_len(); ++m) {
    for (int j = 0; j < t.size(); ++j) both(h.secure(m, j), qa);
  }
  for (int j = 0; j < t.size(); ++j) {
    if (t.is_secure(j)) {
      for (int i = 1; i <= K; ++i) both(h.monitor(i, j), qa);
      continue;
    }
    for (int i = 1; i < k; ++i) both(h.monitor(i, j), qa);
    int ones = 0;
    for (int i = k; i <= K; ++i) ones += h.monitor(i, j);
    const double w = double(ones) / (K - k + 1);
    double qt = 1.0 - w;
    if (clamp) qt = std::min(qt, qb);
    for (int i = k; i <= K; ++i) {
      const int u = h.monitor(i, j);
      // qt hits 0 or 1 only when the window has no bit of that outcome.
      if ((u == 1 && qt == 1.0) || (u == 0 && qt == 0.0)) {
        ADD_FAILURE() << "limit case reached an observed outcome";
      }
      r += (qt == 0.0 || qt == 1.0 ? 0.0 : log_prob(u, qt)) - log_prob(u, q0);
    }
  }
  return r;
}

CentralizedMonitor feed(const BitHistory& h, const NetworkTopology& t,
                        int K, double b, bool clamp) {
  CentralizedMonitor mon(t, NoiseModel::gaussian(), 1.0, b, h,
                         CentralizedOptions{clamp});
  for (int i = 1; i <= K; ++i) mon.push(h.monitor_row(i));
  return mon;
}

}  // namespace

TEST(OracleCusum, IncrementIsLogLikelihoodRatio) {
  const auto g = NoiseModel::gaussian();
  const NetworkTopology t(2, {{0, 1}}, {0});
  OracleCusum c(t, g, 1.0, 1.0, {0.0, 0.5});
  const std::uint8_t one[] = {0, 1};
  const std::uint8_t zero[] = {1, 0};
  EXPECT_NEAR(c.increment(one), std::log((1.0 - g.cdf(-0.5)) / 0.5), 1e-14);
  EXPECT_NEAR(c.increment(zero), std::log(g.cdf(-0.5) / 0.5), 1e-14);
}

TEST(OracleCusum, PageRecursionEqualsBruteForceMax) {
  const auto g = NoiseModel::gaussian();
  const NetworkTopology t(3, {{0, 1}, {1, 2}}, {1});
  std::mt19937_64 rng(4);
  const auto h = random_bits(3, 1, 60, 0.45, rng);
  OracleCusum c(t, g, 1.0, 1.0, {0.4, 0.0, 0.7});
  std::vector<double> inc;
  for (int K = 1; K <= 60; ++K) {
    inc.push_back(c.increment(h.monitor_row(K)));
    const double s = c.step(h.monitor_row(K));
    double best = -1e300, tail = 0.0;
    for (int k = K; k >= 1; --k) {
      tail += inc[k - 1];
      best = std::max(best, tail);
    }
    EXPECT_NEAR(s, best, 1e-10);
  }
}

TEST(OracleCusum, StopsAtFirstCrossing) {
  const auto g = NoiseModel::gaussian();
  const NetworkTopology t(1, {}, {});
  OracleCusum c(t, g, 1.0, 1.0, {0.5}, 1.0);
  const std::uint8_t one[] = {1};
  const double x = c.increment(one);
  int crossed = 0;
  for (int K = 1; K <= 10; ++K) {
    c.step(one);
    if (!crossed && K * x >= 1.0) crossed = K;
  }
  EXPECT_TRUE(c.stopped());
  EXPECT_EQ(c.stopping_time(), crossed);
}

TEST(Centralized, LambdaMatchesPerBitOracle) {
  std::mt19937_64 rng(21);
  const NetworkTopology t(3, {{0, 1}, {1, 2}}, {0});
  for (int rep = 0; rep < 25; ++rep) {
    const auto h = random_bits(3, 8, 7, 0.5, rng);
    for (bool clamp : {true, false}) {
      const auto mon = feed(h, t, 7, 0.18, clamp);
      for (int k = 1; k <= 7; ++k) {
        EXPECT_NEAR(mon.lambda_G(k),
                    lambda_oracle(h, t, 7, k, NoiseModel::gaussian(), 1.0,
                                  0.18, clamp),
                    1e-9)
            << "rep " << rep << " k " << k << " clamp " << clamp;
      }
    }
  }
}

TEST(Centralized, WindowLimitConventions) {
  const NetworkTopology t(2, {{0, 1}}, {0});
  BitHistory h(2, 4, 4);
  for (int m = 1; m <= 4; ++m) h.set_secure(m, m % 2, 1);
  // Insecure sensor all ones in the window (w = 1), secure sensor mixed.
  for (int i = 1; i <= 4; ++i) {
    h.set_monitor(i, 1, 1);
    h.set_monitor(i, 0, i % 2);
  }
  for (bool clamp : {true, false}) {
    const auto mon = feed(h, t, 4, 0.18, clamp);
    for (int k = 1; k <= 4; ++k) {
      EXPECT_TRUE(std::isfinite(mon.lambda_G(k)));
      EXPECT_NEAR(mon.lambda_G(k),
                  lambda_oracle(h, t, 4, k, NoiseModel::gaussian(), 1.0, 0.18,
                                clamp),
                  1e-9);
    }
  }
}

TEST(Centralized, HGIsExhaustiveMaxWithSmallestArgmax) {
  std::mt19937_64 rng(8);
  const NetworkTopology t(4, {{0, 1}, {1, 2}, {2, 3}}, {3});
  for (int rep = 0; rep < 10; ++rep) {
    const auto h = random_bits(4, 10, 12, 0.5, rng);
    CentralizedMonitor mon(t, NoiseModel::gaussian(), 1.0, 0.18, h);
    for (int K = 1; K <= 12; ++K) {
      const auto r = mon.step(h.monitor_row(K));
      double best = -1e300, best_a = -1e300;
      int arg = 0, arg_a = 0;
      for (int k = 1; k <= K; ++k) {
        const auto bl = mon.blocks(k);
        if (bl.total() > best) {
          best = bl.total();
          arg = k;
        }
        if (bl.eta1 + bl.eta2 + bl.eta4 > best_a) {
          best_a = bl.eta1 + bl.eta2 + bl.eta4;
          arg_a = k;
        }
      }
      EXPECT_NEAR(r.H_G, best, 1e-10);
      EXPECT_NEAR(r.H_A, best_a, 1e-10);
      EXPECT_EQ(r.k_hat, arg);
      EXPECT_EQ(r.k_hat_A, arg_a);
    }
  }
}

TEST(Centralized, UnclampedStatisticIsNonNegativeAtFirstCandidate) {
  std::mt19937_64 rng(31);
  const NetworkTopology t(3, {{0, 1}, {1, 2}}, {2});
  for (int rep = 0; rep < 40; ++rep) {
    const auto h = random_bits(3, 5, 10, 0.3 + 0.01 * rep, rng);
    CentralizedMonitor mon(t, NoiseModel::gaussian(), 1.0, 0.18, h,
                           CentralizedOptions{false});
    for (int K = 1; K <= 10; ++K) {
      mon.push(h.monitor_row(K));
      try {
        EXPECT_GE(mon.lambda_G(1), -1e-10);
        EXPECT_GE(mon.evaluate().H_G, -1e-10);
      } catch (const DegenerateBits&) {
      }
    }
  }
}

TEST(Centralized, AllSecureNetworkHasZeroStatistic) {
  std::mt19937_64 rng(2);
  const NetworkTopology t(2, {{0, 1}}, {0, 1});
  const auto h = random_bits(2, 6, 5, 0.5, rng);
  CentralizedMonitor mon(t, NoiseModel::gaussian(), 1.0, 0.18, h);
  for (int K = 1; K <= 5; ++K) {
    const auto r = mon.step(h.monitor_row(K));
    EXPECT_NEAR(r.H_A, 0.0, 1e-12);
    EXPECT_NEAR(r.H_G, 0.0, 1e-12);
    EXPECT_EQ(r.k_hat_A, 1);
  }
}

TEST(Centralized, DegenerateFractionsThrow) {
  const NetworkTopology t(2, {{0, 1}}, {});
  BitHistory h(2, 3, 1);
  CentralizedMonitor mon(t, NoiseModel::gaussian(), 1.0, 0.18, h);
  mon.push(h.monitor_row(1));
  EXPECT_THROW(mon.evaluate(), DegenerateBits);
  EXPECT_THROW(mon.blocks(2), DimensionMismatch);
  const std::uint8_t wrong[] = {1};
  EXPECT_THROW(mon.push(wrong), DimensionMismatch);
  EXPECT_THROW(CentralizedMonitor(t, NoiseModel::gaussian(), 1.0, 0.18, 3, 7),
               DimensionMismatch);
}

TEST(Centralized, StrongerAttackIsDetectedSooner) {
  const auto g = NoiseModel::gaussian();
  const auto t = NetworkTopology(4, {{0, 1}, {1, 2}, {2, 3}}, {0});
  std::vector<double> delays;
  for (double mu : {0.3, 0.6, 1.2}) {
    ScenarioConfig cfg;
    cfg.secure_len = 300;
    cfg.attack_time = 1;
    cfg.mu.assign(4, mu);
    cfg.master_seed = 17;
    double total = 0.0;
    const int reps = 40;
    for (int r = 0; r < reps; ++r) {
      const auto h = generate_history(cfg, g, t, r, 150, true);
      CentralizedMonitor mon(t, g, cfg.tau, cfg.b, h);
      int T = 150;
      for (int K = 1; K <= 150; ++K) {
        if (mon.step(h.monitor_row(K)).H_G >= 10.0) {
          T = K;
          break;
        }
      }
      total += T;
    }
    delays.push_back(total / reps);
  }
  EXPECT_GT(delays[0], delays[1]);
  EXPECT_GT(delays[1], delays[2]);
}

TEST(Centralized, TraceFile) {
  const std::string path = ::testing::TempDir() + "/ctrace.csv";
  write_centralized_trace(path, {{1, 0.5, 0.25, 1}});
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "K,H_G,H_A,k_hat");
  EXPECT_EQ(row.substr(0, 2), "1,");
}
