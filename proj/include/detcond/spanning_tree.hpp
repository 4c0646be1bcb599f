#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "detcond/graph.hpp"
#include "detcond/laplacian.hpp"
#include "detcond/random.hpp"

namespace detcond {

inline constexpr int kMaxTreeEnumerationEdges = 16;

class SizeCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Spanning trees as edge bitmasks, by recursive deletion/contraction in edge
/// order. Self-loops never belong to a tree. Throws SizeCapError above 16 edges.
std::vector<std::uint32_t> spanning_trees(const FiniteGraph& g);

/// |V| * sum over spanning trees of prod_{e in t} w_e, by explicit enumeration.
double kirchhoff_sum(const FiniteGraph& g, const std::vector<double>& w);

/// Weighted spanning tree measure Q_w on a graph.
class TreeMeasure {
 public:
  TreeMeasure(std::shared_ptr<const FiniteGraph> g, std::vector<double> w);

  const FiniteGraph& graph() const { return *graph_; }
  const std::vector<double>& weights() const { return w_; }
  bool enumerable() const { return graph_->num_edges() <= kMaxTreeEnumerationEdges; }

  /// ln of sum_t w(t). Enumerated when possible, otherwise from the determinant.
  double log_partition() const;
  /// Q(f in t): enumeration when enumerable, transfer current otherwise.
  double edge_marginal(EdgeId f) const;
  /// Q(f in t, g in t); enumerable graphs only.
  double joint_marginal(EdgeId f, EdgeId g) const;
  /// Q(f, g in t) - Q(f)Q(g); via -I_f(g) I_g(f) on large graphs.
  double pair_correlation(EdgeId f, EdgeId g) const;

  const std::vector<std::uint32_t>& trees() const { return trees_; }
  /// Weight of each tree in trees().
  const std::vector<double>& tree_weights() const { return tree_weights_; }

 private:
  std::shared_ptr<const FiniteGraph> graph_;
  std::vector<double> w_;
  std::vector<std::uint32_t> trees_;
  std::vector<double> tree_weights_;
  double total_ = 0.0;
};

/// Spanning tree sampled from Q_w with Wilson's algorithm (loop-erased random
/// walks that pick an incident edge with probability proportional to its
/// weight). Returns per-edge membership flags.
std::vector<std::uint8_t> sample_tree(const FiniteGraph& g, const std::vector<double>& w, Rng& rng);

}  // namespace detcond
