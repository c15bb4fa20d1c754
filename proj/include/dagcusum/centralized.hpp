#pragma once

#include "dagcusum/estimators.hpp"
#include "dagcusum/noise.hpp"
#include "dagcusum/topology.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace dagcusum {

/// Page recursion max(prev, 0) + increment, started from 0.
inline double page_step(double prev, double increment) {
  return (prev > 0.0 ? prev : 0.0) + increment;
}

/// CUSUM with known theta and mu (benchmark detector).
class OracleCusum {
 public:
  /// `mu` has one entry per sensor; only insecure entries are used.
  OracleCusum(const NetworkTopology& topology, const NoiseModel& noise,
              double tau, double theta, const std::vector<double>& mu,
              double h = std::numeric_limits<double>::infinity());

  /// Sum over insecure sensors of ln P1(u | theta, mu_j) / P0(u | theta).
  double increment(std::span<const std::uint8_t> bits) const;
  /// Feeds one time step; returns the updated statistic.
  double step(std::span<const std::uint8_t> bits);

  double statistic() const noexcept { return s_; }
  bool stopped() const noexcept { return stopped_; }
  int stopping_time() const noexcept { return t_; }

 private:
  std::vector<int> insecure_;
  std::vector<double> llr0_, llr1_;  // per sensor, for bit 0 and bit 1
  double h_;
  double s_ = 0.0;
  int k_ = 0;
  bool stopped_ = false;
  int t_ = 0;
};

struct CentralizedOptions {
  /// Clamp mu_hat at b. Without the clamp mu_tilde is used directly.
  bool clamp_mu = true;
};

/// The four blocks of Lambda_G^(k,K).
struct GcusumBlocks {
  double eta1 = 0.0;
  double eta2 = 0.0;
  double eta3 = 0.0;
  double eta4 = 0.0;
  double total() const { return eta1 + eta2 + eta3 + eta4; }
};

struct CentralizedResult {
  int K = 0;
  double H_G = 0.0;
  int k_hat = 0;  // argmax of Lambda_G, smallest k on ties
  double H_A = 0.0;
  int k_hat_A = 0;
  double eta1 = 0.0;
  double eta2 = 0.0;
};

/// Centralized GCUSUM and the alternative statistic over a growing bit
/// stream. Block sums are grouped by bit counts: each (k, K) pair costs
/// O(N_A) table lookups, so one evaluation is O(K N_A) and a run to time K
/// is O(K^2 N_A).
class CentralizedMonitor {
 public:
  CentralizedMonitor(const NetworkTopology& topology, const NoiseModel& noise,
                     double tau, double b, int secure_len, long lambda_M,
                     CentralizedOptions options = {});
  /// Uses the secure-phase bits of `bits`.
  CentralizedMonitor(const NetworkTopology& topology, const NoiseModel& noise,
                     double tau, double b, const BitHistory& bits,
                     CentralizedOptions options = {});

  /// Appends the bits of monitoring time K + 1.
  void push(std::span<const std::uint8_t> bits);
  /// push() followed by evaluate().
  CentralizedResult step(std::span<const std::uint8_t> bits) {
    push(bits);
    return evaluate();
  }

  int K() const noexcept { return K_; }
  SumStatistics stats() const;

  /// H_G, H_A and their argmax at the current K >= 1. Throws DegenerateBits
  /// when a pooled fraction is 0 or 1.
  CentralizedResult evaluate() const;
  /// Lambda_G^(k,K) for 1 <= k <= K.
  double lambda_G(int k) const { return blocks(k).total(); }
  GcusumBlocks blocks(int k) const;

 private:
  struct Prepared {
    double eta1, eta2, G1, G2, log_qu, log_pu, qb, log_qb, log_1mqb;
  };
  Prepared prepare() const;
  double eta3_at(const Prepared& p, int k) const;
  double eta4_at(const Prepared& p, int k) const;
  double xlogx(long n) const { return xlogx_[static_cast<std::size_t>(n)]; }

  const NoiseModel noise_;
  double tau_, b_;
  CentralizedOptions opt_;
  int N_, N_S_, N_A_, M_;
  std::vector<int> insecure_;
  std::vector<std::uint8_t> secure_mask_;
  long lambda_M_;
  long lambda_N_ = 0;
  long lambda_S_ = 0;
  int K_ = 0;
  // ones_[i * N_A + s]: ones of insecure sensor s over monitoring times 1..i.
  std::vector<int> ones_;
  // ones_A_[i]: ones of all insecure sensors over times 1..i.
  std::vector<long> ones_A_;
  std::vector<double> xlogx_;
};

struct CentralizedTraceRow {
  int K;
  double H_G;
  double H_A;
  int k_hat;
};

/// CSV `K,H_G,H_A,k_hat`.
void write_centralized_trace(const std::string& path,
                             const std::vector<CentralizedTraceRow>& rows);

}  // namespace dagcusum
