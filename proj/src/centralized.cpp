#include "dagcusum/centralized.hpp"

#include "dagcusum/errors.hpp"
#include "dagcusum/format.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace dagcusum {

OracleCusum::OracleCusum(const NetworkTopology& topology,
                         const NoiseModel& noise, double tau, double theta,
                         const std::vector<double>& mu, double h)
    : insecure_(topology.insecure()),
      llr0_(topology.size(), 0.0),
      llr1_(topology.size(), 0.0),
      h_(h) {
  if (static_cast<int>(mu.size()) != topology.size()) {
    throw DimensionMismatch("oracle CUSUM needs one mu per sensor");
  }
  const double p = q(noise, theta, tau);
  for (int j : insecure_) {
    const double pt = qtilde(noise, theta, mu[j], tau);
    llr0_[j] = std::log(pt) - std::log(p);
    llr1_[j] = std::log1p(-pt) - std::log1p(-p);
  }
}

double OracleCusum::increment(std::span<const std::uint8_t> bits) const {
  double inc = 0.0;
  for (int j : insecure_) inc += bits[j] ? llr1_[j] : llr0_[j];
  return inc;
}

double OracleCusum::step(std::span<const std::uint8_t> bits) {
  ++k_;
  s_ = page_step(s_, increment(bits));
  if (!stopped_ && s_ >= h_) {
    stopped_ = true;
    t_ = k_;
  }
  return s_;
}

CentralizedMonitor::CentralizedMonitor(const NetworkTopology& topology,
                                       const NoiseModel& noise, double tau,
                                       double b, int secure_len, long lambda_M,
                                       CentralizedOptions options)
    : noise_(noise),
      tau_(tau),
      b_(b),
      opt_(options),
      N_(topology.size()),
      N_S_(topology.n_secure()),
      N_A_(topology.n_insecure()),
      M_(secure_len),
      insecure_(topology.insecure()),
      secure_mask_(topology.size(), 0),
      lambda_M_(lambda_M) {
  if (secure_len < 1) throw DimensionMismatch("secure_len must be >= 1");
  if (lambda_M < 0 || lambda_M > static_cast<long>(secure_len) * N_) {
    throw DimensionMismatch("lambda_M outside [0, MN]");
  }
  for (int j : topology.secure()) secure_mask_[j] = 1;
  ones_.assign(static_cast<std::size_t>(N_A_), 0);
  ones_A_.assign(1, 0);
  xlogx_.assign(1, 0.0);
}

CentralizedMonitor::CentralizedMonitor(const NetworkTopology& topology,
                                       const NoiseModel& noise, double tau,
                                       double b, const BitHistory& bits,
                                       CentralizedOptions options)
    : CentralizedMonitor(topology, noise, tau, b, bits.secure_len(),
                         bits.secure_sum(), options) {}

void CentralizedMonitor::push(std::span<const std::uint8_t> bits) {
  if (static_cast<int>(bits.size()) != N_) {
    throw DimensionMismatch("expected " + std::to_string(N_) + " bits, got " +
                            std::to_string(bits.size()));
  }
  ++K_;
  long row_A = 0;
  const std::size_t base = static_cast<std::size_t>(K_ - 1) * N_A_;
  for (int j = 0; j < N_; ++j) {
    lambda_N_ += bits[j];
    if (secure_mask_[j]) lambda_S_ += bits[j];
  }
  for (int s = 0; s < N_A_; ++s) {
    const int u = bits[insecure_[s]];
    ones_.push_back(ones_[base + s] + u);
    row_A += u;
  }
  ones_A_.push_back(ones_A_.back() + row_A);
  const long n = K_;
  xlogx_.push_back(static_cast<double>(n) * std::log(static_cast<double>(n)));
}

SumStatistics CentralizedMonitor::stats() const {
  SumStatistics s;
  s.lambda_M = lambda_M_;
  s.lambda_N = lambda_N_;
  s.lambda_S = lambda_S_;
  s.M = M_;
  s.K = K_;
  s.N = N_;
  s.N_S = N_S_;
  return s;
}

CentralizedMonitor::Prepared CentralizedMonitor::prepare() const {
  const SumStatistics st = stats();
  const double p_u = st.pooled_fraction();
  const double p_a = st.secure_fraction();
  if (!(p_u > 0.0 && p_u < 1.0) || !(p_a > 0.0 && p_a < 1.0)) {
    throw DegenerateBits("GCUSUM: pooled bit fraction " + std::to_string(p_u) +
                         ", secure bit fraction " + std::to_string(p_a));
  }
  Prepared p{};
  p.log_qu = std::log1p(-p_u);
  p.log_pu = std::log(p_u);
  p.G1 = std::log1p(-p_a) - p.log_qu;
  p.G2 = std::log(p_a) - p.log_pu;
  const double MN = static_cast<double>(M_) * N_;
  const double lM = static_cast<double>(lambda_M_);
  const double lS = static_cast<double>(lambda_S_);
  p.eta1 = (MN - lM) * p.G1 + lM * p.G2;
  p.eta2 = (static_cast<double>(K_) * N_S_ - lS) * p.G1 + lS * p.G2;
  if (opt_.clamp_mu) {
    // mu_tilde >= b  <=>  1 - w <= F(F^{-1}(q_a) - b) =: q_b.
    p.qb = noise_.cdf(noise_.quantile(1.0 - p_a) - b_);
    p.log_qb = std::log(p.qb);
    p.log_1mqb = std::log1p(-p.qb);
  } else {
    p.qb = std::numeric_limits<double>::infinity();
  }
  return p;
}

double CentralizedMonitor::eta3_at(const Prepared& p, int k) const {
  const long ones = ones_A_[static_cast<std::size_t>(k - 1)];
  const long zeros = static_cast<long>(k - 1) * N_A_ - ones;
  return static_cast<double>(zeros) * p.G1 + static_cast<double>(ones) * p.G2;
}

double CentralizedMonitor::eta4_at(const Prepared& p, int k) const {
  const long n = K_ - k + 1;
  const double dn = static_cast<double>(n);
  const double lnn = xlogx(n);
  const int* lo = ones_.data() + static_cast<std::size_t>(k - 1) * N_A_;
  const int* hi = ones_.data() + static_cast<std::size_t>(K_) * N_A_;
  double acc = 0.0;
  for (int s = 0; s < N_A_; ++s) {
    const long o = hi[s] - lo[s];
    const long z = n - o;
    if (static_cast<double>(z) <= p.qb * dn) {
      // q~ = 1 - w: Z ln(Z/n) + O ln(O/n).
      acc += xlogx(z) + xlogx(o) - lnn;
    } else {
      acc += static_cast<double>(z) * p.log_qb + static_cast<double>(o) * p.log_1mqb;
    }
  }
  const long o_w = ones_A_[static_cast<std::size_t>(K_)] -
                   ones_A_[static_cast<std::size_t>(k - 1)];
  const long z_w = n * N_A_ - o_w;
  return acc - static_cast<double>(z_w) * p.log_qu -
         static_cast<double>(o_w) * p.log_pu;
}

GcusumBlocks CentralizedMonitor::blocks(int k) const {
  if (k < 1 || k > K_) {
    throw DimensionMismatch("candidate k = " + std::to_string(k) +
                            " outside 1.." + std::to_string(K_));
  }
  const Prepared p = prepare();
  return {p.eta1, p.eta2, eta3_at(p, k), eta4_at(p, k)};
}

CentralizedResult CentralizedMonitor::evaluate() const {
  if (K_ < 1) throw DimensionMismatch("evaluate needs K >= 1");
  const Prepared p = prepare();
  CentralizedResult r;
  r.K = K_;
  r.eta1 = p.eta1;
  r.eta2 = p.eta2;
  double best_g = -std::numeric_limits<double>::infinity();
  double best_a = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= K_; ++k) {
    const double e4 = eta4_at(p, k);
    const double g = eta3_at(p, k) + e4;
    if (g > best_g) {
      best_g = g;
      r.k_hat = k;
    }
    if (e4 > best_a) {
      best_a = e4;
      r.k_hat_A = k;
    }
  }
  r.H_G = p.eta1 + p.eta2 + best_g;
  r.H_A = p.eta1 + p.eta2 + best_a;
  return r;
}

void write_centralized_trace(const std::string& path,
                             const std::vector<CentralizedTraceRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trace '" + path + "'");
  out << "K,H_G,H_A,k_hat\n";
  for (const auto& r : rows) {
    out << r.K << ',' << format_double(r.H_G) << ',' << format_double(r.H_A)
        << ',' << r.k_hat << '\n';
  }
  if (!out) throw IoError("write failed for trace '" + path + "'");
}

}  // namespace dagcusum
