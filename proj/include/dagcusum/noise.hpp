#pragma once

#include <string>

namespace dagcusum {

/// Additive sensor noise with an invertible CDF F.
class NoiseModel {
 public:
  enum class Family { gaussian, logistic };

  /// Zero-mean gaussian with standard deviation `sigma`.
  static NoiseModel gaussian(double sigma = 1.0);
  /// Logistic with scale `s`: F(x) = 1 / (1 + exp(-x / s)).
  static NoiseModel logistic(double s = 1.0);
  /// "gaussian" or "logistic".
  static NoiseModel from_name(const std::string& family, double scale);

  Family family() const noexcept { return family_; }
  double scale() const noexcept { return scale_; }
  std::string name() const;

  double cdf(double x) const;
  double density(double x) const;
  /// F^{-1}(p) for p in (0, 1); throws DomainError otherwise.
  double quantile(double p) const;

 private:
  NoiseModel(Family f, double s);
  Family family_;
  double scale_;
};

/// Probability of a 0 bit before the attack: F(tau - theta).
double q(const NoiseModel& noise, double theta, double tau);
/// Probability of a 0 bit under attack: F(tau - theta - mu).
double qtilde(const NoiseModel& noise, double theta, double mu, double tau);

/// Standard normal quantile (rational approximation plus one Newton step).
double normal_quantile(double p);

}  // namespace dagcusum
