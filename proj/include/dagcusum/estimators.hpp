#pragma once

#include "dagcusum/noise.hpp"
#include "dagcusum/signal.hpp"
#include "dagcusum/topology.hpp"

#include <vector>

namespace dagcusum {

/// Bit sums pooled over the network after K monitoring samples.
struct SumStatistics {
  long lambda_M = 0;  // secure-phase bits, all sensors
  long lambda_N = 0;  // monitoring bits, all sensors
  long lambda_S = 0;  // monitoring bits, secure sensors
  int M = 0;
  int K = 0;
  int N = 0;
  int N_S = 0;

  /// Throws DimensionMismatch when a count is out of range.
  void validate() const;
  /// (lambda_M + lambda_N) / ((M + K) N).
  double pooled_fraction() const;
  /// (lambda_M + lambda_S) / (M N + K N_S).
  double secure_fraction() const;
};

SumStatistics sum_statistics(const BitHistory& bits,
                             const NetworkTopology& topology, int K);

/// n0 ln p0 + n1 ln(1 - p0) with 0 ln 0 = 0.
double bernoulli_loglik(double zeros, double ones, double p_zero);

/// tau - F^{-1}(1 - pooled fraction). Throws DegenerateBits when the pooled
/// fraction is 0 or 1.
double theta_mle_unattacked(const SumStatistics& stats, const NoiseModel& noise,
                            double tau);
/// tau - F^{-1}(1 - secure fraction): uses secure-phase data and secure
/// sensors only.
double theta_hat_a(const SumStatistics& stats, const NoiseModel& noise,
                   double tau);

/// tau - theta_a - F^{-1}(1 - window mean). Throws DegenerateBits for a
/// window mean of 0 or 1.
double mu_tilde(double theta_a, double window_bit_mean, const NoiseModel& noise,
                double tau);
inline double mu_hat(double mu_tilde_value, double b) {
  return mu_tilde_value > b ? mu_tilde_value : b;
}

/// Log-likelihood of all bits up to monitoring time K under no attack.
double loglike_f0(const BitHistory& bits, int K, double theta,
                  const NoiseModel& noise, double tau);
/// Log-likelihood with insecure sensors shifted by mu[j] from time k on.
/// `mu` has one entry per sensor; secure entries are ignored.
double loglike_f1(const BitHistory& bits, const NetworkTopology& topology,
                  int K, double theta, const std::vector<double>& mu, int k,
                  const NoiseModel& noise, double tau);

struct OracleEstimate {
  double theta = 0.0;
  std::vector<double> mu;  // per sensor; secure entries are 0
  double f1 = 0.0;
};

/// Numeric maximizer of f1 subject to mu_j >= b, for tiny instances only
/// (N <= 4, M + K <= 50; OracleScaleExceeded otherwise). Grid of 400 points
/// over theta in [tau - 6s, tau + 6s], per-sensor bisection on df1/dmu_j
/// over [b, b + 6s], then golden-section refinement in theta. The closed-form
/// theta_hat_a is added as an extra starting point when it is defined.
OracleEstimate mle_attack_oracle(const BitHistory& bits,
                                 const NetworkTopology& topology, int K,
                                 const NoiseModel& noise, double tau, double b,
                                 int k);

}  // namespace dagcusum
