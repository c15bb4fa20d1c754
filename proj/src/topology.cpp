#include "dagcusum/topology.hpp"

#include "dagcusum/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dagcusum {

namespace {

constexpr double kSpectralTol = 1e-12;

std::vector<double> singular_values_desc(const Eigen::MatrixXd& w) {
  std::vector<double> sv;
  const double asym = (w - w.transpose()).cwiseAbs().maxCoeff();
  if (asym <= 1e-14 * std::max(1.0, w.cwiseAbs().maxCoeff())) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        w, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      sv.push_back(std::abs(es.eigenvalues()(i)));
    }
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      sv.push_back(svd.singularValues()(i));
    }
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

}  // namespace

NetworkTopology::NetworkTopology(int n_sensors, std::vector<Edge> edges,
                                 std::vector<int> secure)
    : n_(n_sensors) {
  if (n_ < 1) {
    throw InvalidTopology("n_sensors must be positive, got " +
                          std::to_string(n_));
  }
  std::set<Edge> unique;
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n_ || b < 0 || b >= n_) {
      throw InvalidTopology("edge (" + std::to_string(a + 1) + "," +
                            std::to_string(b + 1) + ") has an endpoint outside 1.." +
                            std::to_string(n_));
    }
    if (a == b) {
      throw InvalidTopology("self-loop at sensor " + std::to_string(a + 1));
    }
    unique.insert({std::min(a, b), std::max(a, b)});
  }
  edges_.assign(unique.begin(), unique.end());

  is_secure_.assign(n_, false);
  for (int s : secure) {
    if (s < 0 || s >= n_) {
      throw InvalidTopology("secure sensor " + std::to_string(s + 1) +
                            " outside 1.." + std::to_string(n_));
    }
    if (is_secure_[s]) {
      throw InvalidTopology("secure sensor " + std::to_string(s + 1) +
                            " listed twice");
    }
    is_secure_[s] = true;
  }
  for (int j = 0; j < n_; ++j) {
    (is_secure_[j] ? secure_ : insecure_).push_back(j);
  }

  adj_.assign(n_, {});
  for (auto [a, b] : edges_) {
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }
  for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
}

NetworkTopology NetworkTopology::from_one_based(
    int n_sensors, const std::vector<Edge>& edges,
    const std::vector<int>& secure) {
  std::vector<Edge> e;
  e.reserve(edges.size());
  for (auto [a, b] : edges) e.emplace_back(a - 1, b - 1);
  std::vector<int> s;
  s.reserve(secure.size());
  for (int x : secure) s.push_back(x - 1);
  return NetworkTopology(n_sensors, std::move(e), std::move(s));
}

int NetworkTopology::component_count() const {
  std::vector<bool> seen(n_, false);
  int components = 0;
  std::vector<int> stack;
  for (int start = 0; start < n_; ++start) {
    if (seen[start]) continue;
    ++components;
    seen[start] = true;
    stack.push_back(start);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int u : adj_[v]) {
        if (!seen[u]) {
          seen[u] = true;
          stack.push_back(u);
        }
      }
    }
  }
  return components;
}

bool NetworkTopology::is_connected() const { return component_count() == 1; }

Eigen::MatrixXd NetworkTopology::adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (auto [i, j] : edges_) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return a;
}

Eigen::MatrixXd NetworkTopology::laplacian() const {
  Eigen::MatrixXd a = adjacency();
  Eigen::MatrixXd d = a.rowwise().sum().asDiagonal();
  return d - a;
}

WeightMatrix::WeightMatrix(Eigen::MatrixXd entries)
    : dense_(std::move(entries)) {
  if (dense_.rows() != dense_.cols() || dense_.rows() == 0) {
    throw DimensionMismatch("weight matrix must be square and non-empty");
  }
  sparse_ = dense_.sparseView(1.0, 0.0);
  sparse_.makeCompressed();
  sigma2_ = dagcusum::sigma2(dense_);
}

void WeightMatrix::apply_rounds(Eigen::VectorXd& v, int rounds) const {
  if (v.size() != dense_.rows()) {
    throw DimensionMismatch("vector of size " + std::to_string(v.size()) +
                            " against weight matrix of size " +
                            std::to_string(dense_.rows()));
  }
  Eigen::VectorXd tmp(v.size());
  for (int r = 0; r < rounds; ++r) {
    tmp.noalias() = sparse_ * v;
    v.swap(tmp);
  }
}

double sigma2(const Eigen::MatrixXd& w) {
  if (w.rows() < 2) return 0.0;
  return singular_values_desc(w)[1];
}

Eigen::MatrixXd averaging_matrix(int n) {
  return Eigen::MatrixXd::Constant(n, n, 1.0 / n);
}

WeightNormalization normalization_from_name(const std::string& name) {
  if (name == "squared") return WeightNormalization::squared;
  if (name == "linear") return WeightNormalization::linear;
  throw ConfigError("weight_normalization: unknown value '" + name +
                    "' (expected squared or linear)");
}

std::string normalization_name(WeightNormalization n) {
  return n == WeightNormalization::squared ? "squared" : "linear";
}

WeightMatrix build_laplacian_weights(const NetworkTopology& topology,
                                     WeightNormalization norm) {
  const int n = topology.size();
  if (n < 2) {
    throw SpectralGapViolation("Laplacian weights need at least 2 sensors");
  }
  if (int c = topology.component_count(); c != 1) {
    throw DisconnectedGraph("graph has " + std::to_string(c) +
                            " connected components; sigma_2(W) would be 1");
  }
  const Eigen::MatrixXd lap = topology.laplacian();
  // Laplacian is PSD, so its singular values are its eigenvalues.
  const std::vector<double> sv = singular_values_desc(lap);
  const double s1 = sv.front();
  const double s_nm1 = sv[static_cast<std::size_t>(n - 2)];
  const double scale = norm == WeightNormalization::squared
                           ? 2.0 / (s1 * s1 + s_nm1 * s_nm1)
                           : 2.0 / (s1 + s_nm1);
  WeightMatrix w(Eigen::MatrixXd::Identity(n, n) - scale * lap);
  if (!(w.sigma2() > kSpectralTol && w.sigma2() < 1.0 - kSpectralTol)) {
    throw SpectralGapViolation("sigma_2(W) = " + std::to_string(w.sigma2()) +
                               " is outside (0, 1)");
  }
  return w;
}

ValidationReport validate_condition1(const Eigen::MatrixXd& w,
                                     const NetworkTopology* topology,
                                     double tol) {
  ValidationReport r;
  if (w.rows() != w.cols()) {
    r.sparsity = false;
    r.failures.push_back("matrix is not square");
    return r;
  }
  const Eigen::Index n = w.rows();
  r.max_row_deviation = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
  r.max_column_deviation = (w.colwise().sum().array() - 1.0).abs().maxCoeff();
  r.row_stochastic = r.max_row_deviation <= tol;
  r.column_stochastic = r.max_column_deviation <= tol;
  if (!r.row_stochastic) {
    r.failures.push_back("W1 != 1: max deviation " +
                         std::to_string(r.max_row_deviation));
  }
  if (!r.column_stochastic) {
    r.failures.push_back("1^T W != 1^T: max deviation " +
                         std::to_string(r.max_column_deviation));
  }
  if (topology != nullptr) {
    if (topology->size() != n) {
      r.sparsity = false;
      r.failures.push_back("matrix size does not match topology size");
    } else {
      const Eigen::MatrixXd a = topology->adjacency();
      for (Eigen::Index i = 0; i < n && r.sparsity; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (i != j && a(i, j) == 0.0 && w(i, j) != 0.0) {
            r.sparsity = false;
            r.failures.push_back("entry (" + std::to_string(i + 1) + "," +
                                 std::to_string(j + 1) +
                                 ") is nonzero but not an edge");
            break;
          }
        }
      }
    }
  }
  r.sigma2 = sigma2(w);
  r.spectral_gap = r.sigma2 > kSpectralTol && r.sigma2 < 1.0 - kSpectralTol;
  if (!r.spectral_gap) {
    r.failures.push_back("sigma_2 = " + std::to_string(r.sigma2) +
                         " is outside (0, 1)");
  }
  return r;
}

NetworkTopology parse_topology_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("topology: ") + e.what());
  }
  try {
    const int n = j.at("n_sensors").get<int>();
    std::vector<NetworkTopology::Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) {
        throw ConfigError("topology: each edge must be a pair [i, j]");
      }
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    std::vector<int> secure;
    if (j.contains("secure")) secure = j.at("secure").get<std::vector<int>>();
    return NetworkTopology::from_one_based(n, edges, secure);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("topology: ") + e.what());
  }
}

NetworkTopology load_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open topology file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_topology_json(ss.str());
}

std::string topology_to_json(const NetworkTopology& topology) {
  nlohmann::json j;
  j["n_sensors"] = topology.size();
  j["edges"] = nlohmann::json::array();
  for (auto [a, b] : topology.edges()) {
    j["edges"].push_back({a + 1, b + 1});
  }
  std::vector<int> secure;
  for (int s : topology.secure()) secure.push_back(s + 1);
  j["secure"] = secure;
  return j.dump();
}

}  // namespace dagcusum
