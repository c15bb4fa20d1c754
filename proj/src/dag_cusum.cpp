#include "dagcusum/dag_cusum.hpp"

#include "dagcusum/errors.hpp"
#include "dagcusum/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace dagcusum {

namespace {

bool in_unit(double p) { return p > 0.0 && p < 1.0; }

}  // namespace

Eta12 eta12_hat(double lambda_M, double lambda_N, double lambda_S, int M,
                int K, int N, int N_S) {
  const double p_u = (lambda_M + lambda_N) / (double(M + K) * N);
  const double p_a = (lambda_M + lambda_S) / (double(M) * N + double(K) * N_S);
  if (!in_unit(p_u) || !in_unit(p_a)) {
    throw DegenerateLogArgument("pooled fractions " + format_double(p_u) +
                                ", " + format_double(p_a) +
                                " outside (0, 1)");
  }
  const double G1 = std::log1p(-p_a) - std::log1p(-p_u);
  const double G2 = std::log(p_a) - std::log(p_u);
  Eta12 e;
  e.eta1 = (double(M) * N - lambda_M) * G1 + lambda_M * G2;
  e.eta2 = (double(K) * N_S - lambda_S) * G1 + lambda_S * G2;
  return e;
}

double lambda_A_update(double prev, int bit, int K, double alpha) {
  if (K < 1) throw DomainError("lambda_A_update needs K >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha must lie in (0, 1)");
  }
  const double aK = std::pow(alpha, K);
  const double denom = 1.0 - aK;
  return (alpha - aK) / denom * prev + (1.0 - alpha) / denom * bit;
}

double phi4_hat(int bit, double lambda_M, double lambda_N, double lambda_S,
                double lambda_A, int M, int i, int N, int N_S,
                const NoiseModel& noise, double b) {
  const double p_u = (lambda_M + lambda_N) / (double(M + i) * N);
  const double p_a = (lambda_M + lambda_S) / (double(M) * N + double(i) * N_S);
  if (!in_unit(p_u) || !in_unit(p_a)) {
    throw DegenerateLogArgument("pooled fractions " + format_double(p_u) +
                                ", " + format_double(p_a) +
                                " outside (0, 1)");
  }
  const double q_b = noise.cdf(noise.quantile(1.0 - p_a) - b);
  const double zeta = std::min(1.0 - lambda_A, q_b);
  if (bit == 0) {
    if (!(zeta > 0.0)) throw DegenerateLogArgument("zeta_hat is 0 on a 0 bit");
    return std::log(zeta) - std::log1p(-p_u);
  }
  if (!(zeta < 1.0)) throw DegenerateLogArgument("zeta_hat is 1 on a 1 bit");
  return std::log1p(-zeta) - std::log(p_u);
}

int collapsed_warmup_length(int n, double sigma2, int q_rounds, int secure_len,
                            double tol) {
  if (sigma2 <= 0.0) return 0;
  if (sigma2 >= 1.0) return secure_len;
  const double sQ = std::pow(sigma2, q_rounds);
  const double c = std::pow(double(n), 1.5) / (1.0 - sQ);
  // c * sQ^(L+1) <= tol
  const double need = std::log(tol / c) / std::log(sQ) - 1.0;
  const int L = need <= 0.0 ? 0 : static_cast<int>(std::ceil(need));
  return std::min(L, secure_len);
}

DagCusumNetwork::DagCusumNetwork(const NetworkTopology& topology,
                                 ConsensusMatrices matrices, int q_rounds,
                                 const NoiseModel& noise, double b,
                                 int secure_len, DagOptions options)
    : noise_(noise),
      b_(b),
      opt_(options),
      N_(topology.size()),
      N_S_(topology.n_secure()),
      M_(secure_len),
      engine_(std::move(matrices), q_rounds, options.verification),
      state_(topology.size()),
      xi_(Eigen::VectorXd::Zero(topology.size())) {
  if (engine_.size() != N_) {
    throw DimensionMismatch("weight matrix size " +
                            std::to_string(engine_.size()) +
                            " does not match topology size " +
                            std::to_string(N_));
  }
  if (secure_len < 1) throw ConfigError("secure_len must be >= 1");
  if (!(opt_.alpha > 0.0 && opt_.alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1)");
  }
  secure_mask_.assign(N_, 0);
  for (int s : topology.secure()) secure_mask_[s] = 1;
}

void DagCusumNetwork::refresh_lambdas(int j) {
  state_[j].lambdas = engine_.local_lambda(j);
}

void DagCusumNetwork::warm_up(const BitHistory& history) {
  if (warmed_) throw ConfigError("warm_up called twice");
  if (history.n_sensors() != N_ || history.secure_len() != M_) {
    throw DimensionMismatch("bit history does not match the network");
  }
  int first_exact = 1;
  if (opt_.collapsed_warmup) {
    const int L = collapsed_warmup_length(
        N_, engine_.matrix(Stream::check).sigma2(), engine_.q_rounds(), M_);
    first_exact = M_ - L + 1;
    double total = 0.0;
    for (int m = 1; m < first_exact; ++m) {
      for (std::uint8_t u : history.secure_row(m)) total += u;
    }
    engine_.set_check_average(total);
  }
  for (int m = first_exact; m <= M_; ++m) {
    engine_.secure_interval(history.secure_row(m));
  }
  exact_warmup_ = M_ - first_exact + 1;
  for (int j = 0; j < N_; ++j) {
    refresh_lambdas(j);
    auto& st = state_[j];
    try {
      const Eta12 e = eta12_hat(st.lambdas.lambda_M_hat, 0.0, 0.0, M_, 0, N_,
                                N_S_);
      st.eta1 = e.eta1;
      st.eta2 = e.eta2;
    } catch (const DegenerateLogArgument&) {
      ++degenerate_;
    }
    st.H = st.eta1 + st.eta2 + st.eta3;
  }
  warmed_ = true;
}

void DagCusumNetwork::step(std::span<const std::uint8_t> bits) {
  if (!warmed_) throw ConfigError("step called before warm_up");
  ++K_;
  engine_.monitor_lambda_interval(bits, secure_mask_);
  for (int j = 0; j < N_; ++j) {
    refresh_lambdas(j);
    auto& st = state_[j];
    const auto& l = st.lambdas;
    st.lambda_A = lambda_A_update(st.lambda_A, bits[j], K_, opt_.alpha);
    try {
      const Eta12 e = eta12_hat(l.lambda_M_hat, l.lambda_N_hat, l.lambda_S_hat,
                                M_, K_, N_, N_S_);
      st.eta1 = e.eta1;
      st.eta2 = e.eta2;
    } catch (const DegenerateLogArgument&) {
      ++degenerate_;
    }
    xi_[j] = 0.0;
    if (!secure_mask_[j]) {
      try {
        const double phi =
            phi4_hat(bits[j], l.lambda_M_hat, l.lambda_N_hat, l.lambda_S_hat,
                     st.lambda_A, M_, K_, N_, N_S_, noise_, b_);
        const double next = psi_update(st.psi, phi);
        xi_[j] = next - st.psi;
        st.psi = next;
      } catch (const DegenerateLogArgument&) {
        ++degenerate_;
      } catch (const DomainError&) {
        ++degenerate_;
      }
    }
  }
  engine_.xi_interval(xi_);
  for (int j = 0; j < N_; ++j) {
    auto& st = state_[j];
    st.eta3 = engine_.xi_readout(j, opt_.eta3_times_n);
    st.H = st.eta1 + st.eta2 + st.eta3;
    if (!st.stopped && st.H >= opt_.h) {
      st.stopped = true;
      st.T = K_;
    }
  }
}

bool DagCusumNetwork::all_stopped() const {
  for (const auto& s : state_) {
    if (!s.stopped) return false;
  }
  return true;
}

void DagCusumNetwork::append_trace(std::vector<DagTraceRow>& rows) const {
  for (int j = 0; j < N_; ++j) {
    const auto& s = state_[j];
    rows.push_back({K_, j, s.eta1, s.eta2, s.eta3, s.H, s.stopped});
  }
}

void write_dag_trace(const std::string& path,
                     const std::vector<DagTraceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write DAG trace '" + path + "'");
  out << "K,sensor,eta1,eta2,eta3,H_D,stopped\n";
  for (const auto& r : rows) {
    out << r.K << ',' << r.sensor + 1 << ',' << format_double(r.eta1) << ','
        << format_double(r.eta2) << ',' << format_double(r.eta3) << ','
        << format_double(r.H_D) << ',' << (r.stopped ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("write failed for DAG trace '" + path + "'");
}

}  // namespace dagcusum
