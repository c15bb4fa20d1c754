#include "dagcusum/signal.hpp"

#include "dagcusum/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace dagcusum {

void ScenarioConfig::validate(const NetworkTopology& topology) const {
  if (!std::isfinite(theta)) throw ConfigError("theta must be finite");
  if (std::isnan(tau)) throw ConfigError("tau must not be NaN");
  if (!(b > 0.0)) {
    throw ConfigError("b must be positive, got " + std::to_string(b));
  }
  if (attack_time < 1) {
    throw ConfigError("attack_time must be >= 1, got " +
                      std::to_string(attack_time));
  }
  if (secure_len < 1) {
    throw ConfigError("secure_len (M) must be >= 1, got " +
                      std::to_string(secure_len));
  }
  if (q_rounds < 1) {
    throw ConfigError("q_rounds (Q) must be >= 1, got " +
                      std::to_string(q_rounds));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  if (static_cast<int>(mu.size()) != topology.size()) {
    throw ConfigError("mu has " + std::to_string(mu.size()) +
                      " entries but the topology has " +
                      std::to_string(topology.size()) + " sensors");
  }
  for (int j : topology.insecure()) {
    if (!(mu[j] >= b)) {
      throw ConfigError("mu for sensor " + std::to_string(j + 1) + " (" +
                        std::to_string(mu[j]) + ") is below b = " +
                        std::to_string(b));
    }
  }
  if (kappa && !(*kappa > 0.0)) throw ConfigError("kappa must be positive");
}

BitHistory::BitHistory(int n_sensors, int secure_len, int horizon)
    : n_(n_sensors),
      m_(secure_len),
      horizon_(horizon),
      secure_(static_cast<std::size_t>(n_sensors) * secure_len, 0),
      monitor_(static_cast<std::size_t>(n_sensors) * horizon, 0) {
  if (n_sensors < 1 || secure_len < 0 || horizon < 0) {
    throw DimensionMismatch("invalid bit history dimensions");
  }
}

void BitHistory::set_secure(int m, int j, std::uint8_t bit) {
  secure_.at(static_cast<std::size_t>(m - 1) * n_ + j) = bit ? 1 : 0;
}

void BitHistory::set_monitor(int k, int j, std::uint8_t bit) {
  monitor_.at(static_cast<std::size_t>(k - 1) * n_ + j) = bit ? 1 : 0;
}

long BitHistory::secure_sum() const {
  long s = 0;
  for (auto v : secure_) s += v;
  return s;
}

BitStream::BitStream(std::uint64_t master_seed, std::uint64_t replication,
                     int sensor, Phase phase, std::uint32_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(replication),
                    static_cast<std::uint32_t>(replication >> 32),
                    static_cast<std::uint32_t>(sensor),
                    static_cast<std::uint32_t>(phase),
                    salt};
  engine_.seed(seq);
}

std::uint8_t sample_bit(const ScenarioConfig& config, const NoiseModel& noise,
                        const NetworkTopology& topology, int sensor,
                        Phase phase, int time, bool attacked, BitStream& rng) {
  double shift = 0.0;
  if (attacked && phase == Phase::monitor && !topology.is_secure(sensor) &&
      time >= config.attack_time) {
    shift = config.mu.at(sensor);
  }
  return draw_bit(noise.cdf(config.tau - config.theta - shift), rng);
}

BitHistory generate_history(const ScenarioConfig& config,
                            const NoiseModel& noise,
                            const NetworkTopology& topology,
                            std::uint64_t replication, int horizon,
                            bool attacked) {
  const int n = topology.size();
  const int m_len = config.secure_len;
  BitHistory h(n, m_len, horizon);
  const std::uint32_t salt = attacked ? kSaltAttacked : kSaltUnattacked;
  const double p0 = noise.cdf(config.tau - config.theta);
  for (int j = 0; j < n; ++j) {
    BitStream s(config.master_seed, replication, j, Phase::secure, salt);
    for (int m = 1; m <= m_len; ++m) h.set_secure(m, j, draw_bit(p0, s));

    BitStream r(config.master_seed, replication, j, Phase::monitor, salt);
    const bool hit = attacked && !topology.is_secure(j);
    const double p1 =
        hit ? noise.cdf(config.tau - config.theta - config.mu.at(j)) : p0;
    for (int k = 1; k <= horizon; ++k) {
      h.set_monitor(k, j, draw_bit(k >= config.attack_time ? p1 : p0, r));
    }
  }
  return h;
}

std::string bit_trace_csv(const BitHistory& history) {
  std::string out = "phase,time,sensor,bit\n";
  out.reserve(out.size() + 20 * static_cast<std::size_t>(history.n_sensors()) *
                               (history.secure_len() + history.horizon()));
  for (int m = 1; m <= history.secure_len(); ++m) {
    for (int j = 0; j < history.n_sensors(); ++j) {
      out += "secure," + std::to_string(m) + "," + std::to_string(j + 1) +
             "," + std::to_string(history.secure(m, j)) + "\n";
    }
  }
  for (int k = 1; k <= history.horizon(); ++k) {
    for (int j = 0; j < history.n_sensors(); ++j) {
      out += "monitor," + std::to_string(k) + "," + std::to_string(j + 1) +
             "," + std::to_string(history.monitor(k, j)) + "\n";
    }
  }
  return out;
}

void write_bit_trace(const std::string& path, const BitHistory& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write bit trace '" + path + "'");
  out << bit_trace_csv(history);
  if (!out) throw IoError("write failed for bit trace '" + path + "'");
}

BitHistory parse_bit_trace(const std::string& text) {
  struct Row {
    Phase phase;
    int time, sensor, bit;
  };
  std::vector<Row> rows;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int n = 0, m_len = 0, horizon = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "phase,time,sensor,bit") {
        throw ConfigError("bit trace: unexpected header '" + line + "'");
      }
      continue;
    }
    std::istringstream ls(line);
    std::string phase, t, s, b;
    if (!std::getline(ls, phase, ',') || !std::getline(ls, t, ',') ||
        !std::getline(ls, s, ',') || !std::getline(ls, b)) {
      throw ConfigError("bit trace line " + std::to_string(line_no) +
                        ": expected 4 fields");
    }
    Row r{};
    if (phase == "secure") {
      r.phase = Phase::secure;
    } else if (phase == "monitor") {
      r.phase = Phase::monitor;
    } else {
      throw ConfigError("bit trace line " + std::to_string(line_no) +
                        ": unknown phase '" + phase + "'");
    }
    try {
      r.time = std::stoi(t);
      r.sensor = std::stoi(s);
      r.bit = std::stoi(b);
    } catch (const std::exception&) {
      throw ConfigError("bit trace line " + std::to_string(line_no) +
                        ": non-integer field");
    }
    if (r.time < 1 || r.sensor < 1 || (r.bit != 0 && r.bit != 1)) {
      throw ConfigError("bit trace line " + std::to_string(line_no) +
                        ": value out of range");
    }
    n = std::max(n, r.sensor);
    if (r.phase == Phase::secure) {
      m_len = std::max(m_len, r.time);
    } else {
      horizon = std::max(horizon, r.time);
    }
    rows.push_back(r);
  }
  if (n == 0) throw ConfigError("bit trace is empty");
  BitHistory h(n, m_len, horizon);
  for (const auto& r : rows) {
    if (r.phase == Phase::secure) {
      h.set_secure(r.time, r.sensor - 1, static_cast<std::uint8_t>(r.bit));
    } else {
      h.set_monitor(r.time, r.sensor - 1, static_cast<std::uint8_t>(r.bit));
    }
  }
  return h;
}

BitHistory read_bit_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open bit trace '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bit_trace(ss.str());
}

}  // namespace dagcusum
