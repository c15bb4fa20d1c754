#pragma once

#include "dagcusum/consensus.hpp"
#include "dagcusum/noise.hpp"
#include "dagcusum/signal.hpp"
#include "dagcusum/topology.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace dagcusum {

struct Eta12 {
  double eta1 = 0.0;
  double eta2 = 0.0;
};

/// Local eta^(1), eta^(2) from consensus estimates of lambda_M, lambda_N,
/// lambda_S. Throws DegenerateLogArgument unless both pooled fractions lie
/// in (0, 1).
Eta12 eta12_hat(double lambda_M, double lambda_N, double lambda_S, int M,
                int K, int N, int N_S);

/// Exponentially weighted bit mean after the K-th bit.
double lambda_A_update(double prev, int bit, int K, double alpha);

/// Per-sensor log-ratio increment at monitoring time i. zeta is
/// min(1 - lambda_A, F(F^{-1}(1 - p_a) - b)), which is the branch selected
/// by comparing mu_tilde with b. Throws DegenerateLogArgument when a needed
/// logarithm or quantile argument falls outside its domain.
double phi4_hat(int bit, double lambda_M, double lambda_N, double lambda_S,
                double lambda_A, int M, int i, int N, int N_S,
                const NoiseModel& noise, double b);

inline double psi_update(double psi_prev, double phi4) {
  return (psi_prev > 0.0 ? psi_prev : 0.0) + phi4;
}

struct DagOptions {
  double alpha = 0.979;
  double h = std::numeric_limits<double>::infinity();
  /// Replace the first M - L secure intervals by their exact average, where
  /// L is the smallest count whose residual consensus error is below 1e-12.
  bool collapsed_warmup = false;
  /// Read eta^(3) as N e_j^T Xi instead of e_j^T Xi.
  bool eta3_times_n = false;
  bool verification = false;
};

struct DagSensorState {
  double psi = 0.0;
  double lambda_A = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double eta3 = 0.0;
  double H = 0.0;
  bool stopped = false;
  int T = 0;
  LocalLambdaEstimates lambdas;
};

struct DagTraceRow {
  int K;
  int sensor;  // 0-based
  double eta1, eta2, eta3, H_D;
  bool stopped;
};

/// All sensors of one network running the distributed detector in lockstep.
class DagCusumNetwork {
 public:
  DagCusumNetwork(const NetworkTopology& topology, ConsensusMatrices matrices,
                  int q_rounds, const NoiseModel& noise, double b,
                  int secure_len, DagOptions options = {});

  /// Secure phase: M consensus intervals on the secure bits, then H = eta^(1).
  void warm_up(const BitHistory& history);
  /// One monitoring interval with the bits of time K + 1.
  void step(std::span<const std::uint8_t> bits);

  int K() const noexcept { return K_; }
  int size() const noexcept { return N_; }
  const DagSensorState& sensor(int j) const { return state_.at(j); }
  const std::vector<DagSensorState>& sensors() const noexcept {
    return state_;
  }
  const ConsensusEngine& engine() const noexcept { return engine_; }
  bool all_stopped() const;
  /// Steps where a statistic was held because of a degenerate argument.
  long degenerate_events() const noexcept { return degenerate_; }
  /// Secure intervals run exactly during warm-up.
  int exact_warmup_intervals() const noexcept { return exact_warmup_; }

  void append_trace(std::vector<DagTraceRow>& rows) const;

 private:
  void refresh_lambdas(int j);

  NoiseModel noise_;
  double b_;
  DagOptions opt_;
  int N_, N_S_, M_;
  int K_ = 0;
  bool warmed_ = false;
  int exact_warmup_ = 0;
  std::vector<std::uint8_t> secure_mask_;
  ConsensusEngine engine_;
  std::vector<DagSensorState> state_;
  Eigen::VectorXd xi_;
  long degenerate_ = 0;
};

/// Number of trailing secure intervals run exactly by the collapsed warm-up.
int collapsed_warmup_length(int n, double sigma2, int q_rounds, int secure_len,
                            double tol = 1e-12);

/// CSV `K,sensor,eta1,eta2,eta3,H_D,stopped` with 1-based sensors.
void write_dag_trace(const std::string& path,
                     const std::vector<DagTraceRow>& rows);

}  // namespace dagcusum
