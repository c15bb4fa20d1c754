#include "dagcusum/noise.hpp"

#include "dagcusum/errors.hpp"

#include <cmath>
#include <numbers>

namespace dagcusum {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal quantile needs p in (0, 1), got " +
                      std::to_string(p));
  }
  // Acklam's coefficients.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double r = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
        ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double r0 = p - 0.5;
    const double r = r0 * r0;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        r0 /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double r = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
        ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }
  // Halley refinement; the upper tail is handled through the complement to
  // keep relative accuracy.
  const double e = (p > 0.5) ? -(0.5 * std::erfc(x / std::numbers::sqrt2) - (1.0 - p))
                             : normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

NoiseModel::NoiseModel(Family f, double s) : family_(f), scale_(s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DomainError("noise scale must be positive and finite");
  }
}

NoiseModel NoiseModel::gaussian(double sigma) {
  return NoiseModel(Family::gaussian, sigma);
}

NoiseModel NoiseModel::logistic(double s) {
  return NoiseModel(Family::logistic, s);
}

NoiseModel NoiseModel::from_name(const std::string& family, double scale) {
  if (family == "gaussian") return gaussian(scale);
  if (family == "logistic") return logistic(scale);
  throw ConfigError("unknown noise family '" + family +
                    "' (expected gaussian or logistic)");
}

std::string NoiseModel::name() const {
  return family_ == Family::gaussian ? "gaussian" : "logistic";
}

double NoiseModel::cdf(double x) const {
  const double z = x / scale_;
  if (family_ == Family::gaussian) return normal_cdf(z);
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double NoiseModel::density(double x) const {
  const double z = x / scale_;
  if (family_ == Family::gaussian) return normal_pdf(z) / scale_;
  const double e = std::exp(-std::abs(z));
  return e / ((1.0 + e) * (1.0 + e) * scale_);
}

double NoiseModel::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("quantile needs p in (0, 1), got " + std::to_string(p));
  }
  if (family_ == Family::gaussian) return scale_ * normal_quantile(p);
  return scale_ * (std::log(p) - std::log1p(-p));
}

double q(const NoiseModel& noise, double theta, double tau) {
  return noise.cdf(tau - theta);
}

double qtilde(const NoiseModel& noise, double theta, double mu, double tau) {
  return noise.cdf(tau - theta - mu);
}

}  // namespace dagcusum
