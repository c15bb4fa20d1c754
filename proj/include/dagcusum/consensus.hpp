#pragma once

#include "dagcusum/topology.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <memory>
#include <span>

namespace dagcusum {

/// Accumulator streams: secure-phase bits, all monitoring bits, monitoring
/// bits of secure sensors, and the xi innovations of the DAG detector.
enum class Stream : int { check = 0, main = 1, tilde = 2, xi = 3 };
inline constexpr int kStreams = 4;

/// One weight matrix per stream. The default is the same matrix for all.
struct ConsensusMatrices {
  std::array<std::shared_ptr<const WeightMatrix>, kStreams> w;

  static ConsensusMatrices uniform(const WeightMatrix& m);
  const WeightMatrix& operator[](Stream s) const {
    return *w[static_cast<int>(s)];
  }
};

/// N^{3/2} s^Q / (1 - s^Q) with s = sigma_2. Accepts sigma_2 in [0, 1).
double lemma1_bound(int n, double sigma2, int q_rounds);

struct LocalLambdaEstimates {
  double lambda_M_hat = 0.0;
  double lambda_N_hat = 0.0;
  double lambda_S_hat = 0.0;
  double bound_M = 0.0;
  double bound_N = 0.0;
  double bound_S = 0.0;
};

/// Running consensus: every interval adds the innovation vectors to the
/// accumulators and applies Q sparse weight multiplications per stream.
class ConsensusEngine {
 public:
  /// In verification mode the injected totals are tracked centrally so the
  /// local estimates can be checked against ground truth.
  ConsensusEngine(ConsensusMatrices matrices, int q_rounds,
                  bool verification = false);

  int size() const noexcept { return n_; }
  int q_rounds() const noexcept { return q_; }
  /// Number of completed intervals l.
  int time() const noexcept { return l_; }

  /// Gamma^(l) = W^Q (Gamma^(l-1) + gamma^(l)) for each stream.
  void interval(const Eigen::VectorXd& g_check, const Eigen::VectorXd& g,
                const Eigen::VectorXd& g_tilde, const Eigen::VectorXd& xi);
  /// Secure-phase interval: the bits enter the check stream only.
  void secure_interval(std::span<const std::uint8_t> bits);
  /// Monitoring interval, first half: bits enter the main stream and bits of
  /// secure sensors (secure_mask[j] != 0) the tilde stream; the check stream
  /// keeps mixing. Advances time.
  void monitor_lambda_interval(std::span<const std::uint8_t> bits,
                               std::span<const std::uint8_t> secure_mask);
  /// Monitoring interval, second half: the xi stream only. Does not advance
  /// time.
  void xi_interval(const Eigen::VectorXd& xi);

  /// Replaces the check accumulator by its exact average (total / N) 1.
  void set_check_average(double total);

  const Eigen::VectorXd& accumulator(Stream s) const {
    return acc_[static_cast<int>(s)];
  }
  /// N e_j^T Gamma for the three lambda streams, with their error bounds.
  LocalLambdaEstimates local_lambda(int j) const;
  /// e_j^T Xi, or N e_j^T Xi when `times_n` is set.
  double xi_readout(int j, bool times_n = false) const;

  double bound(Stream s) const { return bounds_[static_cast<int>(s)]; }
  const WeightMatrix& matrix(Stream s) const { return m_[s]; }

  bool verification() const noexcept { return verify_; }
  /// Sum of all injected entries of stream `s` (verification mode only).
  double injected_total(Stream s) const;
  /// max over sensors and lambda streams of |lambda_hat - lambda| - bound
  /// (verification mode only). Non-positive when every estimate is within
  /// its bound.
  double max_bound_excess() const;

 private:
  void inject_and_mix(int s, const Eigen::VectorXd* g);

  ConsensusMatrices m_;
  int n_;
  int q_;
  bool verify_;
  int l_ = 0;
  std::array<Eigen::VectorXd, kStreams> acc_;
  std::array<bool, kStreams> active_{};
  std::array<double, kStreams> injected_{};
  std::array<double, kStreams> bounds_{};
};

}  // namespace dagcusum
