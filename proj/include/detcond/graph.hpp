#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace detcond {

using VertexId = int;
using EdgeId = int;

/// Lattice coordinate of a vertex. Empty when the vertex has no position
/// (for example the merged boundary vertex of a wired box).
using Point = std::vector<int>;

struct Edge {
  VertexId u = 0;
  VertexId v = 0;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite connected multigraph. Parallel edges and self-loops are allowed.
/// Vertices are numbered 0..n-1. Immutable after construction.
class FiniteGraph {
 public:
  FiniteGraph(int num_vertices, std::vector<Edge> edges,
              std::vector<VertexId> boundary = {}, int dimension = 0,
              std::vector<Point> coords = {},
              std::vector<EdgeId> source_edges = {});

  int num_vertices() const { return num_vertices_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }
  bool is_self_loop(EdgeId e) const { return edges_[e].u == edges_[e].v; }

  /// Edges incident to each vertex (a self-loop is listed once).
  const std::vector<std::vector<EdgeId>>& incidence() const { return incidence_; }
  std::vector<int> degrees() const;

  const std::vector<VertexId>& boundary() const { return boundary_; }
  bool is_boundary(VertexId v) const { return is_boundary_[v] != 0; }

  /// Lattice dimension of the embedding, 0 when no coordinates are attached.
  int dimension() const { return dimension_; }
  bool has_coordinate(VertexId v) const { return dimension_ > 0 && !coords_[v].empty(); }
  const Point& coordinate(VertexId v) const { return coords_.at(v); }
  std::optional<VertexId> find_vertex(const Point& x) const;
  /// First edge joining a and b in either orientation.
  std::optional<EdgeId> find_edge(VertexId a, VertexId b) const;

  /// Edge id in the graph this one was derived from (identity for fresh graphs).
  EdgeId source_edge(EdgeId e) const { return source_edges_[e]; }
  const std::vector<EdgeId>& source_edges() const { return source_edges_; }

  /// FNV-1a hash of the vertex count and the edge list.
  std::uint64_t hash() const;

 private:
  int num_vertices_;
  std::vector<Edge> edges_;
  std::vector<VertexId> boundary_;
  std::vector<char> is_boundary_;
  int dimension_;
  std::vector<Point> coords_;
  std::vector<EdgeId> source_edges_;
  std::vector<std::vector<EdgeId>> incidence_;
};

/// Orientation used for currents: from the smaller to the larger vertex id.
inline std::pair<VertexId, VertexId> oriented(const Edge& e) {
  return e.u <= e.v ? std::pair{e.u, e.v} : std::pair{e.v, e.u};
}

/// Box [-n,n]^d with nearest-neighbour edges. Boundary is the set of
/// vertices with some coordinate equal to +-n. Wired boxes merge the
/// boundary into a single vertex; their edges keep the free-box edge ids as
/// source ids.
FiniteGraph build_box(int dimension, int radius, bool wired);

/// Rectangular grid with `rows` x `cols` vertices at coordinates (c, r).
FiniteGraph build_grid(int rows, int cols);

FiniteGraph build_path(int num_vertices);
FiniteGraph build_cycle(int num_vertices);
FiniteGraph build_complete(int num_vertices);
/// Triangle with vertices at (0,0), (0,1), (1,0).
FiniteGraph build_triangle();
/// Star K_{1,k}: center 0, leaves 1..k marked as boundary.
FiniteGraph build_star(int leaves);

/// Builtin names: triangle, c4, k4, path3, grid2x2, grid2x3, wired1 (wired
/// Lambda_1 in d=2), star4, and box:<d>:<n>:<free|wired>.
FiniteGraph builtin_graph(const std::string& name);

struct Contraction {
  FiniteGraph graph;
  std::vector<VertexId> vertex_map;             // old vertex -> new vertex
  std::vector<std::optional<EdgeId>> edge_map;  // old edge -> new edge, nullopt if contracted or looped
  std::vector<EdgeId> edge_origin;              // new edge -> old edge
};

/// Identify the endpoints of every edge in `edges`. Self-loops are dropped,
/// parallel edges kept. Throws GraphError when no edge survives.
Contraction contract_edges(const FiniteGraph& g, std::span<const EdgeId> edges);
/// Identify all vertices in `vertices` with one another.
Contraction contract_vertices(const FiniteGraph& g, std::span<const VertexId> vertices);

/// Subgraph on the given edges and their endpoints. Throws if disconnected.
Contraction edge_subgraph(const FiniteGraph& g, std::span<const EdgeId> edges);

/// Edge-list text format:
///   graph v=<n> e=<m> d=<dim>
///   [lines "coord <vertex> x1 .. xd" when d > 0]
///   <u> <v>          (m lines)
///   boundary: <ids...>
FiniteGraph read_graph(std::istream& in);
void write_graph(std::ostream& out, const FiniteGraph& g);
FiniteGraph load_graph(const std::string& name_or_path);

}  // namespace detcond
