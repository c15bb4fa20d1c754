#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace dagcusum {

/// Undirected sensor graph with a secure/insecure partition of the nodes.
///
/// Sensor indices are 0-based in the API; the file format is 1-based.
class NetworkTopology {
 public:
  using Edge = std::pair<int, int>;

  /// Edges are normalized to (min, max) and de-duplicated. Throws
  /// InvalidTopology on self-loops, out-of-range endpoints or bad secure
  /// indices.
  NetworkTopology(int n_sensors, std::vector<Edge> edges,
                  std::vector<int> secure);

  static NetworkTopology from_one_based(int n_sensors,
                                        const std::vector<Edge>& edges,
                                        const std::vector<int>& secure);

  int size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<int>& secure() const noexcept { return secure_; }
  const std::vector<int>& insecure() const noexcept { return insecure_; }
  int n_secure() const noexcept { return static_cast<int>(secure_.size()); }
  int n_insecure() const noexcept {
    return static_cast<int>(insecure_.size());
  }
  bool is_secure(int j) const { return is_secure_.at(j); }
  const std::vector<int>& neighbors(int j) const { return adj_.at(j); }

  bool is_connected() const;
  /// Number of connected components (1 for a connected graph).
  int component_count() const;

  Eigen::MatrixXd adjacency() const;
  Eigen::MatrixXd laplacian() const;

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<int> secure_;
  std::vector<int> insecure_;
  std::vector<bool> is_secure_;
  std::vector<std::vector<int>> adj_;
};

/// Consensus weight matrix with a cached second singular value and a sparse
/// copy for the message-passing rounds.
class WeightMatrix {
 public:
  explicit WeightMatrix(Eigen::MatrixXd entries);

  int size() const noexcept { return static_cast<int>(dense_.rows()); }
  const Eigen::MatrixXd& dense() const noexcept { return dense_; }
  double sigma2() const noexcept { return sigma2_; }

  /// v <- W^rounds v, as `rounds` sparse matrix-vector products.
  void apply_rounds(Eigen::VectorXd& v, int rounds) const;

 private:
  Eigen::MatrixXd dense_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> sparse_;
  double sigma2_;
};

/// How the Laplacian step size is normalized.
enum class WeightNormalization {
  squared,  // 2 / (sigma_1^2 + sigma_{N-1}^2)
  linear,   // 2 / (sigma_1 + sigma_{N-1}), the best constant edge weight
};

/// "squared" or "linear"; throws ConfigError otherwise.
WeightNormalization normalization_from_name(const std::string& name);
std::string normalization_name(WeightNormalization n);

/// W = I - c L with L = D - A the graph Laplacian and c from `norm`
/// (default 2 / (sigma_1(L)^2 + sigma_{N-1}(L)^2)).
///
/// Throws DisconnectedGraph (checked by traversal first) or
/// SpectralGapViolation when the result has sigma_2 outside (0, 1).
WeightMatrix build_laplacian_weights(
    const NetworkTopology& topology,
    WeightNormalization norm = WeightNormalization::squared);

/// J = 11^T / N.
Eigen::MatrixXd averaging_matrix(int n);

/// Second-largest singular value (0 for a 1x1 matrix).
double sigma2(const Eigen::MatrixXd& w);

struct ValidationReport {
  bool row_stochastic = false;
  bool column_stochastic = false;
  bool sparsity = true;  // vacuously true when no topology is supplied
  bool spectral_gap = false;
  double sigma2 = 0.0;
  double max_row_deviation = 0.0;
  double max_column_deviation = 0.0;
  std::vector<std::string> failures;

  bool ok() const noexcept {
    return row_stochastic && column_stochastic && sparsity && spectral_gap;
  }
};

/// Checks 1^T W = 1^T, W 1 = 1 (tolerance `tol`), the sparsity pattern
/// against `topology` when given, and 0 < sigma_2(W) < 1.
ValidationReport validate_condition1(const Eigen::MatrixXd& w,
                                     const NetworkTopology* topology = nullptr,
                                     double tol = 1e-12);

/// Topology file: {"n_sensors": N, "edges": [[i, j], ...], "secure": [...]}
/// with 1-based indices.
NetworkTopology parse_topology_json(const std::string& text);
NetworkTopology load_topology_file(const std::string& path);
std::string topology_to_json(const NetworkTopology& topology);

}  // namespace dagcusum
