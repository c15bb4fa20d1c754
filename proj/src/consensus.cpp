#include "dagcusum/consensus.hpp"

#include "dagcusum/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dagcusum {

ConsensusMatrices ConsensusMatrices::uniform(const WeightMatrix& m) {
  auto p = std::make_shared<const WeightMatrix>(m);
  ConsensusMatrices c;
  c.w.fill(p);
  return c;
}

double lemma1_bound(int n, double sigma2, int q_rounds) {
  if (!(sigma2 >= 0.0 && sigma2 < 1.0)) {
    throw DomainError("lemma1_bound needs sigma_2 in [0, 1), got " +
                      std::to_string(sigma2));
  }
  if (q_rounds < 1 || n < 1) {
    throw DomainError("lemma1_bound needs N >= 1 and Q >= 1");
  }
  const double s = std::pow(sigma2, q_rounds);
  return std::pow(static_cast<double>(n), 1.5) * s / (1.0 - s);
}

ConsensusEngine::ConsensusEngine(ConsensusMatrices matrices, int q_rounds,
                                 bool verification)
    : m_(std::move(matrices)), q_(q_rounds), verify_(verification) {
  if (q_rounds < 1) throw DomainError("Q must be >= 1");
  for (const auto& p : m_.w) {
    if (!p) throw DimensionMismatch("missing consensus weight matrix");
  }
  n_ = m_.w[0]->size();
  for (int s = 0; s < kStreams; ++s) {
    if (m_.w[s]->size() != n_) {
      throw DimensionMismatch("consensus weight matrices differ in size");
    }
    acc_[s] = Eigen::VectorXd::Zero(n_);
    const double s2 = m_.w[s]->sigma2();
    bounds_[s] = s2 < 1.0 ? lemma1_bound(n_, s2, q_) : HUGE_VAL;
  }
}

void ConsensusEngine::inject_and_mix(int s, const Eigen::VectorXd* g) {
  if (g != nullptr) {
    if (g->size() != n_) {
      throw DimensionMismatch("innovation of size " + std::to_string(g->size()) +
                              " for a network of " + std::to_string(n_));
    }
    if (!active_[s] && g->cwiseAbs().maxCoeff() != 0.0) active_[s] = true;
    acc_[s] += *g;
    if (verify_) injected_[s] += g->sum();
  }
  if (active_[s]) m_.w[s]->apply_rounds(acc_[s], q_);
}

void ConsensusEngine::interval(const Eigen::VectorXd& g_check,
                               const Eigen::VectorXd& g,
                               const Eigen::VectorXd& g_tilde,
                               const Eigen::VectorXd& xi) {
  inject_and_mix(0, &g_check);
  inject_and_mix(1, &g);
  inject_and_mix(2, &g_tilde);
  inject_and_mix(3, &xi);
  ++l_;
}

void ConsensusEngine::secure_interval(std::span<const std::uint8_t> bits) {
  if (static_cast<int>(bits.size()) != n_) {
    throw DimensionMismatch("secure bits of wrong size");
  }
  Eigen::VectorXd g(n_);
  for (int j = 0; j < n_; ++j) g[j] = bits[j];
  inject_and_mix(0, &g);
  for (int s = 1; s < kStreams; ++s) inject_and_mix(s, nullptr);
  ++l_;
}

void ConsensusEngine::monitor_lambda_interval(
    std::span<const std::uint8_t> bits,
    std::span<const std::uint8_t> secure_mask) {
  if (static_cast<int>(bits.size()) != n_ ||
      static_cast<int>(secure_mask.size()) != n_) {
    throw DimensionMismatch("monitoring bits of wrong size");
  }
  Eigen::VectorXd g(n_), gt(n_);
  for (int j = 0; j < n_; ++j) {
    g[j] = bits[j];
    gt[j] = secure_mask[j] ? bits[j] : 0.0;
  }
  inject_and_mix(0, nullptr);
  inject_and_mix(1, &g);
  inject_and_mix(2, &gt);
  ++l_;
}

void ConsensusEngine::xi_interval(const Eigen::VectorXd& xi) {
  inject_and_mix(3, &xi);
}

void ConsensusEngine::set_check_average(double total) {
  acc_[0].setConstant(total / n_);
  active_[0] = true;
  if (verify_) injected_[0] = total;
}

LocalLambdaEstimates ConsensusEngine::local_lambda(int j) const {
  if (j < 0 || j >= n_) throw DimensionMismatch("sensor index out of range");
  LocalLambdaEstimates e;
  e.lambda_M_hat = n_ * acc_[0][j];
  e.lambda_N_hat = n_ * acc_[1][j];
  e.lambda_S_hat = n_ * acc_[2][j];
  e.bound_M = bounds_[0];
  e.bound_N = bounds_[1];
  e.bound_S = bounds_[2];
  return e;
}

double ConsensusEngine::xi_readout(int j, bool times_n) const {
  return (times_n ? n_ : 1) * acc_[3][j];
}

double ConsensusEngine::injected_total(Stream s) const {
  if (!verify_) throw DomainError("injected totals need verification mode");
  return injected_[static_cast<int>(s)];
}

double ConsensusEngine::max_bound_excess() const {
  if (!verify_) throw DomainError("bound check needs verification mode");
  double worst = -HUGE_VAL;
  for (int s = 0; s < 3; ++s) {
    for (int j = 0; j < n_; ++j) {
      const double err = std::abs(n_ * acc_[s][j] - injected_[s]);
      worst = std::max(worst, err - bounds_[s]);
    }
  }
  return worst;
}

}  // namespace dagcusum
