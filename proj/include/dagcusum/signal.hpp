#pragma once

#include "dagcusum/noise.hpp"
#include "dagcusum/topology.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace dagcusum {

/// Scenario parameters shared by every detector.
struct ScenarioConfig {
  double theta = 1.0;
  double tau = 1.0;
  double b = 0.18;
  /// Attack magnitude per sensor (size N); entries of secure sensors unused.
  std::vector<double> mu;
  /// Monitoring samples k >= attack_time are attacked.
  int attack_time = 10;
  int secure_len = 1000;
  int q_rounds = 10;
  double alpha = 0.979;
  double h = std::numeric_limits<double>::infinity();
  std::optional<double> kappa;
  std::uint64_t master_seed = 1;

  /// Throws ConfigError naming the offending field or sensor.
  void validate(const NetworkTopology& topology) const;
};

enum class Phase : std::uint8_t { secure = 0, monitor = 1 };

/// Secure-phase bits (m = 1..M) and monitoring bits (k = 1..horizon) of one
/// replication, stored time-major.
class BitHistory {
 public:
  BitHistory() = default;
  BitHistory(int n_sensors, int secure_len, int horizon);

  int n_sensors() const noexcept { return n_; }
  int secure_len() const noexcept { return m_; }
  int horizon() const noexcept { return horizon_; }

  std::uint8_t secure(int m, int j) const {
    return secure_[static_cast<std::size_t>(m - 1) * n_ + j];
  }
  std::uint8_t monitor(int k, int j) const {
    return monitor_[static_cast<std::size_t>(k - 1) * n_ + j];
  }
  std::span<const std::uint8_t> secure_row(int m) const {
    return {secure_.data() + static_cast<std::size_t>(m - 1) * n_,
            static_cast<std::size_t>(n_)};
  }
  std::span<const std::uint8_t> monitor_row(int k) const {
    return {monitor_.data() + static_cast<std::size_t>(k - 1) * n_,
            static_cast<std::size_t>(n_)};
  }
  void set_secure(int m, int j, std::uint8_t bit);
  void set_monitor(int k, int j, std::uint8_t bit);

  /// Sum of all secure-phase bits (lambda_M).
  long secure_sum() const;

  bool operator==(const BitHistory&) const = default;

 private:
  int n_ = 0;
  int m_ = 0;
  int horizon_ = 0;
  std::vector<std::uint8_t> secure_;
  std::vector<std::uint8_t> monitor_;
};

/// Uniform source for one (seed, replication, sensor, phase, salt) stream.
/// The 53-bit mantissa is assembled by hand so streams are identical across
/// standard libraries.
class BitStream {
 public:
  BitStream(std::uint64_t master_seed, std::uint64_t replication, int sensor,
            Phase phase, std::uint32_t salt);
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// 1 iff theta + shift + noise > tau, drawn by inversion: the noise draw
/// exceeds tau - theta - shift exactly when U > F(tau - theta - shift).
inline std::uint8_t draw_bit(double p_zero, BitStream& rng) {
  return rng.uniform() > p_zero ? 1 : 0;
}

/// One bit for `sensor` at `time` (monitoring index or secure index). The
/// attack shift mu_j applies to insecure sensors at monitoring times
/// k >= attack_time when `attacked` is set.
std::uint8_t sample_bit(const ScenarioConfig& config, const NoiseModel& noise,
                        const NetworkTopology& topology, int sensor,
                        Phase phase, int time, bool attacked, BitStream& rng);

inline constexpr std::uint32_t kSaltAttacked = 1;
inline constexpr std::uint32_t kSaltUnattacked = 2;

/// Full bit history of one replication. Secure and monitoring bits come from
/// separate streams, so the secure prefix is shared across different M.
BitHistory generate_history(const ScenarioConfig& config,
                            const NoiseModel& noise,
                            const NetworkTopology& topology,
                            std::uint64_t replication, int horizon,
                            bool attacked);

/// CSV `phase,time,sensor,bit` with 1-based sensors.
void write_bit_trace(const std::string& path, const BitHistory& history);
std::string bit_trace_csv(const BitHistory& history);
BitHistory read_bit_trace(const std::string& path);
BitHistory parse_bit_trace(const std::string& text);

}  // namespace dagcusum
