#include "dagcusum/estimators.hpp"

#include "dagcusum/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dagcusum {

void SumStatistics::validate() const {
  auto fail = [](const std::string& m) { throw DimensionMismatch(m); };
  if (M < 0 || K < 0 || N < 1 || N_S < 0 || N_S > N) {
    fail("sum statistics: invalid dimensions");
  }
  if (lambda_M < 0 || lambda_M > static_cast<long>(M) * N) {
    fail("lambda_M outside [0, MN]");
  }
  if (lambda_N < 0 || lambda_N > static_cast<long>(K) * N) {
    fail("lambda_N outside [0, KN]");
  }
  if (lambda_S < 0 || lambda_S > lambda_N ||
      lambda_S > static_cast<long>(K) * N_S) {
    fail("lambda_S outside [0, min(lambda_N, K N_S)]");
  }
}

double SumStatistics::pooled_fraction() const {
  return static_cast<double>(lambda_M + lambda_N) /
         (static_cast<double>(M + K) * N);
}

double SumStatistics::secure_fraction() const {
  return static_cast<double>(lambda_M + lambda_S) /
         (static_cast<double>(M) * N + static_cast<double>(K) * N_S);
}

SumStatistics sum_statistics(const BitHistory& bits,
                             const NetworkTopology& topology, int K) {
  if (K > bits.horizon()) {
    throw DimensionMismatch("K exceeds the bit history horizon");
  }
  SumStatistics s;
  s.M = bits.secure_len();
  s.K = K;
  s.N = topology.size();
  s.N_S = topology.n_secure();
  s.lambda_M = bits.secure_sum();
  for (int k = 1; k <= K; ++k) {
    for (int j = 0; j < s.N; ++j) {
      const int u = bits.monitor(k, j);
      s.lambda_N += u;
      if (topology.is_secure(j)) s.lambda_S += u;
    }
  }
  return s;
}

double bernoulli_loglik(double zeros, double ones, double p_zero) {
  double r = 0.0;
  if (zeros != 0.0) r += zeros * std::log(p_zero);
  if (ones != 0.0) r += ones * std::log1p(-p_zero);
  return r;
}

namespace {

double theta_from_fraction(double frac, const NoiseModel& noise, double tau,
                           const char* what) {
  if (!(frac > 0.0 && frac < 1.0)) {
    throw DegenerateBits(std::string(what) + ": bit fraction is " +
                         std::to_string(frac) + "; F^{-1} diverges");
  }
  return tau - noise.quantile(1.0 - frac);
}

}  // namespace

double theta_mle_unattacked(const SumStatistics& stats, const NoiseModel& noise,
                            double tau) {
  return theta_from_fraction(stats.pooled_fraction(), noise, tau,
                             "theta_mle_unattacked");
}

double theta_hat_a(const SumStatistics& stats, const NoiseModel& noise,
                   double tau) {
  return theta_from_fraction(stats.secure_fraction(), noise, tau,
                             "theta_hat_a");
}

double mu_tilde(double theta_a, double window_bit_mean,
                const NoiseModel& noise, double tau) {
  if (!(window_bit_mean > 0.0 && window_bit_mean < 1.0)) {
    throw DegenerateBits("mu_tilde: window bit mean is " +
                         std::to_string(window_bit_mean));
  }
  return tau - theta_a - noise.quantile(1.0 - window_bit_mean);
}

double loglike_f0(const BitHistory& bits, int K, double theta,
                  const NoiseModel& noise, double tau) {
  const double p = q(noise, theta, tau);
  const long total = static_cast<long>(bits.secure_len() + K) * bits.n_sensors();
  long ones = bits.secure_sum();
  for (int k = 1; k <= K; ++k) {
    for (auto u : bits.monitor_row(k)) ones += u;
  }
  return bernoulli_loglik(static_cast<double>(total - ones),
                          static_cast<double>(ones), p);
}

double loglike_f1(const BitHistory& bits, const NetworkTopology& topology,
                  int K, double theta, const std::vector<double>& mu, int k,
                  const NoiseModel& noise, double tau) {
  const double p = q(noise, theta, tau);
  const int n = topology.size();
  long z0 = 0, o0 = 0;
  for (int m = 1; m <= bits.secure_len(); ++m) {
    for (auto u : bits.secure_row(m)) (u ? o0 : z0)++;
  }
  double r = 0.0;
  for (int j = 0; j < n; ++j) {
    long z1 = 0, o1 = 0;
    for (int i = 1; i <= K; ++i) {
      const int u = bits.monitor(i, j);
      if (topology.is_secure(j) || i < k) {
        (u ? o0 : z0)++;
      } else {
        (u ? o1 : z1)++;
      }
    }
    if (z1 + o1 > 0) {
      r += bernoulli_loglik(static_cast<double>(z1), static_cast<double>(o1),
                            qtilde(noise, theta, mu.at(j), tau));
    }
  }
  return r + bernoulli_loglik(static_cast<double>(z0), static_cast<double>(o0), p);
}

namespace {

struct OracleProblem {
  const NoiseModel& noise;
  double tau, b, hi;
  long z0 = 0, o0 = 0;            // bits evaluated at q(theta)
  std::vector<int> sensors;       // insecure sensors
  std::vector<long> z1, o1;       // per insecure sensor window counts

  // Maximizer of Z ln qt + O ln(1 - qt) over mu in [b, hi] at fixed theta.
  double best_mu(double theta, std::size_t s) const {
    const double zs = static_cast<double>(z1[s]);
    const double n = zs + static_cast<double>(o1[s]);
    if (n == 0.0) return b;
    // Sign of df1/dmu is the sign of n qt - Z; it decreases in mu.
    auto slope = [&](double mu) {
      return n * noise.cdf(tau - theta - mu) - zs;
    };
    if (slope(b) <= 0.0) return b;
    if (slope(hi) >= 0.0) return hi;
    double lo = b, up = hi;
    for (int it = 0; it < 200 && up - lo > 1e-14 * (1.0 + std::abs(up)); ++it) {
      const double mid = 0.5 * (lo + up);
      (slope(mid) > 0.0 ? lo : up) = mid;
    }
    return 0.5 * (lo + up);
  }

  double profile(double theta, std::vector<double>* mu_out = nullptr) const {
    double r = bernoulli_loglik(static_cast<double>(z0), static_cast<double>(o0),
                                noise.cdf(tau - theta));
    for (std::size_t s = 0; s < sensors.size(); ++s) {
      const double mu = best_mu(theta, s);
      if (mu_out) (*mu_out)[sensors[s]] = mu;
      if (z1[s] + o1[s] > 0) {
        r += bernoulli_loglik(static_cast<double>(z1[s]),
                              static_cast<double>(o1[s]),
                              noise.cdf(tau - theta - mu));
      }
    }
    return std::isnan(r) ? -std::numeric_limits<double>::infinity() : r;
  }
};

}  // namespace

OracleEstimate mle_attack_oracle(const BitHistory& bits,
                                 const NetworkTopology& topology, int K,
                                 const NoiseModel& noise, double tau, double b,
                                 int k) {
  const int n = topology.size();
  if (n > 4 || bits.secure_len() + K > 50) {
    throw OracleScaleExceeded("oracle limited to N <= 4 and M + K <= 50 (got N = " +
                              std::to_string(n) + ", M + K = " +
                              std::to_string(bits.secure_len() + K) + ")");
  }
  if (k < 1 || k > K || K > bits.horizon()) {
    throw DimensionMismatch("oracle needs 1 <= k <= K <= horizon");
  }
  const double s = noise.scale();
  OracleProblem p{noise, tau, b, b + 6.0 * s, 0, 0, {}, {}, {}};
  for (int m = 1; m <= bits.secure_len(); ++m) {
    for (auto u : bits.secure_row(m)) (u ? p.o0 : p.z0)++;
  }
  for (int j = 0; j < n; ++j) {
    long z = 0, o = 0;
    for (int i = 1; i <= K; ++i) {
      const int u = bits.monitor(i, j);
      if (topology.is_secure(j) || i < k) {
        (u ? p.o0 : p.z0)++;
      } else {
        (u ? o : z)++;
      }
    }
    if (!topology.is_secure(j)) {
      p.sensors.push_back(j);
      p.z1.push_back(z);
      p.o1.push_back(o);
    }
  }

  const double lo = tau - 6.0 * s;
  const double hi = tau + 6.0 * s;
  constexpr int kGrid = 400;
  const double step = (hi - lo) / (kGrid - 1);
  double best_theta = lo;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int g = 0; g < kGrid; ++g) {
    const double t = lo + step * g;
    const double v = p.profile(t);
    if (v > best_val) {
      best_val = v;
      best_theta = t;
    }
  }
  double bracket_lo = std::max(lo, best_theta - step);
  double bracket_hi = std::min(hi, best_theta + step);

  SumStatistics st = sum_statistics(bits, topology, K);
  const double frac = st.secure_fraction();
  if (frac > 0.0 && frac < 1.0) {
    const double t_a = theta_hat_a(st, noise, tau);
    const double v = p.profile(t_a);
    if (v > best_val) {
      best_val = v;
      best_theta = t_a;
      bracket_lo = t_a - step;
      bracket_hi = t_a + step;
    }
  }

  // Golden-section search on the profile likelihood inside the bracket.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = bracket_lo, c = bracket_hi;
  double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
  double f1v = p.profile(x1), f2v = p.profile(x2);
  for (int it = 0; it < 200 && c - a > 1e-13; ++it) {
    if (f1v < f2v) {
      a = x1;
      x1 = x2;
      f1v = f2v;
      x2 = a + gr * (c - a);
      f2v = p.profile(x2);
    } else {
      c = x2;
      x2 = x1;
      f2v = f1v;
      x1 = c - gr * (c - a);
      f1v = p.profile(x1);
    }
  }
  const double t_ref = 0.5 * (a + c);
  const double v_ref = p.profile(t_ref);
  if (v_ref > best_val) {
    best_val = v_ref;
    best_theta = t_ref;
  }

  OracleEstimate out;
  out.theta = best_theta;
  out.mu.assign(n, 0.0);
  out.f1 = p.profile(best_theta, &out.mu);
  return out;
}

}  // namespace dagcusum
