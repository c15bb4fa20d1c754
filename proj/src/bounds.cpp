#include "dagcusum/bounds.hpp"

#include "dagcusum/errors.hpp"
#include "dagcusum/format.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace dagcusum {

namespace {

void check_q(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("q must lie in (0, 1), got " + format_double(q));
  }
}

double geometric_ratio(double sigma2, int q_rounds) {
  const double s = std::pow(sigma2, q_rounds);
  return s / (1.0 - s);
}

}  // namespace

RateFunctions rate_functions(double q) {
  check_q(q);
  RateFunctions r;
  r.upsilon1 = (1.0 - q / 2.0) * std::log((2.0 - q) / (1.0 - q)) -
               std::numbers::ln2;
  r.upsilon2 = 0.5 * (1.0 + q) * std::log((1.0 + q) / q) - std::numbers::ln2;
  return r;
}

double epsilon1(double q) {
  check_q(q);
  return 0.5 * (1.0 - q);
}

double epsilon2(double q) {
  check_q(q);
  return 0.5 * q;
}

double epsilon_star(double q) {
  check_q(q);
  return 0.5 * std::min(q, 1.0 - q);
}

double upsilon_star(double q) {
  const RateFunctions r = rate_functions(q);
  return std::min(r.upsilon1, r.upsilon2);
}

double mn_min(double q) { return std::numbers::ln2 / upsilon_star(q); }

double threshold_for_kappa(double kappa, long M, long N, double q) {
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  if (M < 1 || N < 1) throw DomainError("M and N must be positive");
  const double u = upsilon_star(q);
  const double mn = double(M) * double(N);
  if (!(mn > std::numbers::ln2 / u)) {
    throw InfeasibleMN("MN = " + format_double(mn) +
                       " does not exceed ln2 / upsilon* = " +
                       format_double(std::numbers::ln2 / u));
  }
  // 1 - 2 exp(-u MN) = -expm1(ln 2 - u MN)
  const double denom = -std::expm1(std::numbers::ln2 - u * mn);
  return double(N) * (kappa / denom + double(M)) *
         std::log(1.0 / epsilon_star(q));
}

double theorem1_probability_floor(long M, long N, double q) {
  const double u = upsilon_star(q);
  const double x = std::numbers::ln2 - u * double(M) * double(N);
  return x >= 0.0 ? 0.0 : -std::expm1(x);
}

double plug_in_q(double lambda_M, long M, long N) {
  if (M < 1 || N < 1) throw DomainError("M and N must be positive");
  return 1.0 - lambda_M / (double(M) * double(N));
}

double consensus_gap_constant(int N, double q, double sigma2_check,
                         double sigma2_tilde, double sigma2_main,
                         int q_rounds) {
  check_q(q);
  for (double s : {sigma2_check, sigma2_tilde, sigma2_main}) {
    if (!(s >= 0.0 && s < 1.0)) {
      throw DomainError("sigma_2 must lie in [0, 1)");
    }
  }
  const double lead = double(N) * N * (2.0 - q) / (q * (1.0 - q));
  return lead * (2.0 * geometric_ratio(sigma2_check, q_rounds) +
                 geometric_ratio(sigma2_tilde, q_rounds) +
                 geometric_ratio(sigma2_main, q_rounds));
}

FalseAlarmCertificate make_certificate(double q, double kappa, long M, long N,
                                       CertificateMode mode) {
  FalseAlarmCertificate c;
  c.mode = mode;
  c.q = q;
  c.eps1 = epsilon1(q);
  c.eps2 = epsilon2(q);
  c.eps_star = epsilon_star(q);
  const RateFunctions r = rate_functions(q);
  c.upsilon1 = r.upsilon1;
  c.upsilon2 = r.upsilon2;
  c.upsilon_star = std::min(r.upsilon1, r.upsilon2);
  c.mn_min = std::numbers::ln2 / c.upsilon_star;
  c.kappa = kappa;
  c.M = M;
  c.N = N;
  c.probability_floor = theorem1_probability_floor(M, N, q);
  try {
    c.h_min = threshold_for_kappa(kappa, M, N, q);
    c.feasible = true;
  } catch (const InfeasibleMN&) {
    c.h_min = std::numeric_limits<double>::quiet_NaN();
    c.feasible = false;
  }
  return c;
}

std::string FalseAlarmCertificate::to_text() const {
  std::ostringstream o;
  auto line = [&](const char* k, const std::string& v) {
    o << k;
    for (std::size_t i = std::string(k).size(); i < 18; ++i) o << ' ';
    o << v << '\n';
  };
  line("mode", mode == CertificateMode::benchmark ? "benchmark"
                                                   : "heuristic (plug-in q)");
  line("q", format_double(q));
  line("eps1", format_double(eps1));
  line("eps2", format_double(eps2));
  line("eps_star", format_double(eps_star));
  line("upsilon1", format_double(upsilon1));
  line("upsilon2", format_double(upsilon2));
  line("upsilon_star", format_double(upsilon_star));
  line("mn_min", format_double(mn_min));
  line("M", std::to_string(M));
  line("N", std::to_string(N));
  line("kappa", format_double(kappa));
  line("feasible", feasible ? "yes" : "no");
  line("h_min", feasible ? format_double(h_min) : "n/a");
  line("prob_floor", format_double(probability_floor));
  return o.str();
}

std::string FalseAlarmCertificate::to_json() const {
  nlohmann::json j;
  j["mode"] = mode == CertificateMode::benchmark ? "benchmark" : "heuristic";
  j["q"] = q;
  j["eps1"] = eps1;
  j["eps2"] = eps2;
  j["eps_star"] = eps_star;
  j["upsilon1"] = upsilon1;
  j["upsilon2"] = upsilon2;
  j["upsilon_star"] = upsilon_star;
  j["mn_min"] = mn_min;
  j["M"] = M;
  j["N"] = N;
  j["kappa"] = kappa;
  j["feasible"] = feasible;
  j["h_min"] = feasible ? nlohmann::json(h_min) : nlohmann::json(nullptr);
  j["probability_floor"] = probability_floor;
  return j.dump();
}

}  // namespace dagcusum
