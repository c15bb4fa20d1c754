#pragma once

#include <string>

namespace dagcusum {

struct RateFunctions {
  double upsilon1 = 0.0;
  double upsilon2 = 0.0;
};

/// Large-deviation rates of the pooled bit fraction leaving
/// (1 - q - eps1, 1 - q + eps2). Throws DomainError unless q is in (0, 1).
RateFunctions rate_functions(double q);

/// eps1 = (1 - q) / 2, eps2 = q / 2, eps* = min(eps1, eps2).
double epsilon1(double q);
double epsilon2(double q);
double epsilon_star(double q);

double upsilon_star(double q);
/// ln 2 / upsilon*: MN must exceed this for the threshold bound to apply.
double mn_min(double q);

/// Smallest h with E_inf{T_G} >= kappa:
/// N (kappa / (1 - 2 exp(-upsilon* M N)) + M) ln(1 / eps*).
/// Throws InfeasibleMN when MN <= ln 2 / upsilon*.
double threshold_for_kappa(double kappa, long M, long N, double q);

/// max(0, 1 - 2 exp(-upsilon* M N)).
double theorem1_probability_floor(long M, long N, double q);

/// 1 - lambda_M / (M N): the secure-phase estimate of q.
double plug_in_q(double lambda_M, long M, long N);

/// N^2 (2 - q) / (q (1 - q)) * (2 r(check) + r(tilde) + r(main)) with
/// r(s) = s^Q / (1 - s^Q).
double consensus_gap_constant(int N, double q, double sigma2_check,
                         double sigma2_tilde, double sigma2_main,
                         int q_rounds);

enum class CertificateMode {
  benchmark,  // true q(theta)
  heuristic,  // plug-in q from secure-phase bits
};

struct FalseAlarmCertificate {
  CertificateMode mode = CertificateMode::benchmark;
  double q = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eps_star = 0.0;
  double upsilon1 = 0.0;
  double upsilon2 = 0.0;
  double upsilon_star = 0.0;
  double mn_min = 0.0;
  double kappa = 0.0;
  long M = 0;
  long N = 0;
  bool feasible = false;
  double h_min = 0.0;  // NaN when infeasible
  double probability_floor = 0.0;

  std::string to_text() const;
  std::string to_json() const;
};

/// Never throws on infeasibility; check `feasible`.
FalseAlarmCertificate make_certificate(double q, double kappa, long M, long N,
                                       CertificateMode mode);

}  // namespace dagcusum
