#include "detcond/spanning_tree.hpp"

#include <cmath>
#include <numeric>

namespace detcond {

namespace {

struct Forest {
  std::vector<int> parent;
  int components;

  explicit Forest(int n) : parent(n), components(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) const {
    while (parent[x] != x) x = parent[x];
    return x;
  }
};

void enumerate_trees(const FiniteGraph& g, int e, Forest& forest, std::uint32_t mask,
                     std::vector<std::uint32_t>& out) {
  if (forest.components == 1) {
    out.push_back(mask);
    return;
  }
  const int remaining = g.num_edges() - e;
  if (remaining < forest.components - 1) return;
  const Edge& ed = g.edge(e);
  const int a = forest.find(ed.u), b = forest.find(ed.v);
  if (a != b) {
    // Contract e: it joins the tree.
    forest.parent[b] = a;
    --forest.components;
    enumerate_trees(g, e + 1, forest, mask | (1u << e), out);
    forest.parent[b] = b;
    ++forest.components;
  }
  // Delete e.
  enumerate_trees(g, e + 1, forest, mask, out);
}

double tree_weight(std::uint32_t mask, const std::vector<double>& w) {
  double x = 1.0;
  for (size_t e = 0; e < w.size(); ++e)
    if (mask >> e & 1u) x *= w[e];
  return x;
}

}  // namespace

std::vector<std::uint32_t> spanning_trees(const FiniteGraph& g) {
  if (g.num_edges() > kMaxTreeEnumerationEdges)
    throw SizeCapError("spanning tree enumeration is capped at 16 edges");
  std::vector<std::uint32_t> out;
  Forest forest(g.num_vertices());
  enumerate_trees(g, 0, forest, 0u, out);
  return out;
}

double kirchhoff_sum(const FiniteGraph& g, const std::vector<double>& w) {
  double s = 0.0;
  for (std::uint32_t t : spanning_trees(g)) s += tree_weight(t, w);
  return static_cast<double>(g.num_vertices()) * s;
}

TreeMeasure::TreeMeasure(std::shared_ptr<const FiniteGraph> g, std::vector<double> w)
    : graph_(std::move(g)), w_(std::move(w)) {
  if (static_cast<int>(w_.size()) != graph_->num_edges()) throw LinalgError("weights do not match graph");
  if (enumerable()) {
    trees_ = spanning_trees(*graph_);
    tree_weights_.reserve(trees_.size());
    for (std::uint32_t t : trees_) tree_weights_.push_back(tree_weight(t, w_));
    total_ = std::accumulate(tree_weights_.begin(), tree_weights_.end(), 0.0);
  }
}

double TreeMeasure::log_partition() const {
  if (enumerable()) return std::log(total_);
  return log_det_pinned(*graph_, w_, 0);
}

double TreeMeasure::edge_marginal(EdgeId f) const {
  if (graph_->is_self_loop(f)) return 0.0;
  if (!enumerable()) return transfer_current(*graph_, w_, f, f);
  double s = 0.0;
  for (size_t i = 0; i < trees_.size(); ++i)
    if (trees_[i] >> f & 1u) s += tree_weights_[i];
  return s / total_;
}

double TreeMeasure::joint_marginal(EdgeId f, EdgeId g) const {
  if (!enumerable()) throw SizeCapError("joint marginals need an enumerable graph");
  double s = 0.0;
  for (size_t i = 0; i < trees_.size(); ++i)
    if ((trees_[i] >> f & 1u) && (trees_[i] >> g & 1u)) s += tree_weights_[i];
  return s / total_;
}

double TreeMeasure::pair_correlation(EdgeId f, EdgeId g) const {
  if (!enumerable()) return -transfer_current(*graph_, w_, f, g) * transfer_current(*graph_, w_, g, f);
  return joint_marginal(f, g) - edge_marginal(f) * edge_marginal(g);
}

std::vector<std::uint8_t> sample_tree(const FiniteGraph& g, const std::vector<double>& w, Rng& rng) {
  const int n = g.num_vertices();
  const auto& inc = g.incidence();
  std::vector<std::uint8_t> in_tree(n, 0);
  std::vector<EdgeId> next_edge(n, -1);
  std::vector<std::uint8_t> out(g.num_edges(), 0);
  in_tree[0] = 1;

  auto other = [&](EdgeId e, VertexId v) { return g.edge(e).u == v ? g.edge(e).v : g.edge(e).u; };
  auto step = [&](VertexId v) {
    double total = 0.0;
    for (EdgeId e : inc[v])
      if (!g.is_self_loop(e)) total += w[e];
    double u = uniform01(rng) * total;
    EdgeId last = -1;
    for (EdgeId e : inc[v]) {
      if (g.is_self_loop(e)) continue;
      last = e;
      if (u < w[e]) return e;
      u -= w[e];
    }
    return last;
  };

  for (VertexId start = 0; start < n; ++start) {
    // Random walk until the tree is hit, remembering the last exit edge of
    // every visited vertex; following those edges gives the loop erasure.
    for (VertexId v = start; !in_tree[v];) {
      next_edge[v] = step(v);
      v = other(next_edge[v], v);
    }
    for (VertexId v = start; !in_tree[v];) {
      in_tree[v] = 1;
      out[next_edge[v]] = 1;
      v = other(next_edge[v], v);
    }
  }
  return out;
}

}  // namespace detcond
