#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "detcond/graph.hpp"

namespace detcond {

/// Per-edge hard flags (1 = hard, conductance q; 0 = soft, conductance 1).
using Configuration = std::vector<std::uint8_t>;

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two-state conductances over the edges of one graph.
struct Conductances {
  double q = 1.0;
  Configuration hard;

  Conductances() = default;
  Conductances(double q_value, Configuration flags);
  static Conductances all_soft(int num_edges, double q_value) { return {q_value, Configuration(num_edges, 0)}; }
  static Conductances all_hard(int num_edges, double q_value) { return {q_value, Configuration(num_edges, 1)}; }

  int size() const { return static_cast<int>(hard.size()); }
  double value(EdgeId e) const { return hard[e] ? q : 1.0; }
  std::vector<double> weights() const;
  int num_hard() const;
};

/// Graph Laplacian with vertex `pin` removed, as a sparse matrix indexed by
/// the remaining vertices in increasing order. Self-loops contribute nothing.
Eigen::SparseMatrix<double> pinned_laplacian(const FiniteGraph& g, const std::vector<double>& w, VertexId pin);

/// Index of vertex v in the pinned system, -1 for the pin.
inline int pinned_index(VertexId v, VertexId pin) { return v == pin ? -1 : (v < pin ? v : v - 1); }

/// Solves the pinned Laplacian system. Dense Cholesky up to `kDenseLimit`
/// unknowns, preconditioned conjugate gradients above.
class PinnedSolver {
 public:
  static constexpr int kDenseLimit = 2000;

  PinnedSolver(const FiniteGraph& g, const std::vector<double>& w, VertexId pin = 0);

  bool dense() const { return dense_; }
  /// Potential with phi(pin) = 0 for a zero-sum source over all vertices.
  Eigen::VectorXd potential(const Eigen::VectorXd& source) const;
  /// ln det of the pinned Laplacian.
  double log_det() const;
  /// b_a^T Delta^{-1} b_b with b_e = delta_head - delta_tail.
  double bilinear(VertexId tail_a, VertexId head_a, VertexId tail_b, VertexId head_b) const;

 private:
  const FiniteGraph* graph_;
  VertexId pin_;
  bool dense_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::SparseMatrix<double> sparse_;
};

double log_det_pinned(const FiniteGraph& g, const std::vector<double>& w, VertexId pin = 0);
/// ln det of the Laplacian on zero-mean functions: ln|V| + ln det(pinned).
double log_det_zero_mean(const FiniteGraph& g, const std::vector<double>& w);
double log_det_zero_mean(const FiniteGraph& g, const Conductances& k);

/// R_eff between the endpoints of edge f.
double effective_resistance(const FiniteGraph& g, const std::vector<double>& w, EdgeId f);

/// I_f(g2) = w_{g2} b_{g2}^T Delta^{-1} b_f with edges oriented from the
/// smaller to the larger vertex id.
double transfer_current(const FiniteGraph& g, const std::vector<double>& w, EdgeId f, EdgeId g2);
double transfer_current(const FiniteGraph& g, const Conductances& k, EdgeId f, EdgeId g2);

/// b_f^T Delta^{-1} b_g with the same orientation as transfer_current.
double gradient_covariance(const FiniteGraph& g, const std::vector<double>& w, EdgeId f, EdgeId g2);

/// Lattice edge from x to x + e_i in a box. In wired boxes a neighbour that
/// was merged into the boundary vertex is found through that vertex.
struct LatticeEdge {
  EdgeId edge;
  VertexId tail;
  VertexId head;
};
std::optional<LatticeEdge> lattice_edge(const FiniteGraph& box, const Point& x, int direction);

/// Edge from the origin to e_1 of a free or wired box.
EdgeId central_edge(const FiniteGraph& box);

/// (delta_{x+e_i} - delta_x)^T Delta^{-1} (delta_{y+e_j} - delta_y).
double green_gradient(const FiniteGraph& box, const std::vector<double>& w, const Point& x, int i, const Point& y,
                      int j);

/// Laplacian factorization that follows single-edge conductance changes.
/// Dense mode keeps the inverse of the pinned Laplacian and applies
/// Sherman-Morrison updates refined against the sparse matrix; sparse mode re-solves with conjugate gradients.
class LaplacianState {
 public:
  LaplacianState(std::shared_ptr<const FiniteGraph> g, Conductances k, VertexId pin = 0,
                 int refresh_threshold = 256);

  const FiniteGraph& graph() const { return *graph_; }
  const Conductances& conductances() const { return k_; }
  VertexId pin() const { return pin_; }
  bool dense() const { return dense_; }
  int update_count() const { return updates_; }
  int refresh_threshold() const { return refresh_threshold_; }

  double log_det_pinned() const { return log_det_; }
  double log_det_zero_mean() const;

  /// R_eff between the endpoints of f under the current conductances.
  double resistance(EdgeId f) const;
  /// Toggle edge f between 1 and q; returns the change of ln det.
  double flip_edge(EdgeId f);
  /// Set edge f to the given state; returns the change of ln det (0 if unchanged).
  double set_edge(EdgeId f, bool hard);
  /// Rebuild the factorization from scratch.
  void refactorize();

  /// Refactorize once updates have amplified the relative error of the inverse by this factor.
  static constexpr double kGrowthLimit = 1e12;

  /// Max relative residual |Delta M - I| over a few probe columns (dense mode).
  double probe_residual() const;

 private:
  double pinned_quadratic(EdgeId f) const;
  Eigen::VectorXd edge_potential(EdgeId f) const;

  std::shared_ptr<const FiniteGraph> graph_;
  Conductances k_;
  VertexId pin_;
  int refresh_threshold_;
  bool dense_;
  int updates_ = 0;
  double growth_ = 1.0;
  double log_det_ = 0.0;
  Eigen::MatrixXd inverse_;
  Eigen::SparseMatrix<double> sparse_;
};

}  // namespace detcond
