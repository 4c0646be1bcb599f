#include "detcond/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>

namespace detcond {

namespace {

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Keeps the smaller id as representative.
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent_[b] = a; else parent_[a] = b;
  }

 private:
  std::vector<int> parent_;
};

Contraction contract_by(const FiniteGraph& g, UnionFind& uf) {
  const int n = g.num_vertices();
  std::vector<VertexId> vertex_map(n, -1);
  std::vector<int> class_size(n, 0);
  int next = 0;
  for (int v = 0; v < n; ++v) {
    const int r = uf.find(v);
    if (vertex_map[r] < 0) vertex_map[r] = next++;
    vertex_map[v] = vertex_map[r];
    ++class_size[vertex_map[v]];
  }

  Contraction out{FiniteGraph(1, {}), vertex_map, std::vector<std::optional<EdgeId>>(g.num_edges()), {}};
  std::vector<Edge> edges;
  std::vector<EdgeId> sources;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& old = g.edge(e);
    const Edge mapped{vertex_map[old.u], vertex_map[old.v]};
    if (mapped.u == mapped.v) continue;
    out.edge_map[e] = static_cast<EdgeId>(edges.size());
    out.edge_origin.push_back(e);
    edges.push_back(mapped);
    sources.push_back(g.source_edge(e));
  }
  if (edges.empty()) throw GraphError("contraction leaves a graph without edges");

  std::vector<VertexId> boundary;
  for (VertexId b : g.boundary()) boundary.push_back(vertex_map[b]);
  std::sort(boundary.begin(), boundary.end());
  boundary.erase(std::unique(boundary.begin(), boundary.end()), boundary.end());

  std::vector<Point> coords;
  if (g.dimension() > 0) {
    coords.assign(next, Point{});
    for (int v = 0; v < n; ++v)
      if (class_size[vertex_map[v]] == 1 && g.has_coordinate(v)) coords[vertex_map[v]] = g.coordinate(v);
  }
  out.graph = FiniteGraph(next, std::move(edges), std::move(boundary), g.dimension(),
                          std::move(coords), std::move(sources));
  return out;
}

}  // namespace

FiniteGraph::FiniteGraph(int num_vertices, std::vector<Edge> edges, std::vector<VertexId> boundary,
                         int dimension, std::vector<Point> coords, std::vector<EdgeId> source_edges)
    : num_vertices_(num_vertices),
      edges_(std::move(edges)),
      boundary_(std::move(boundary)),
      dimension_(dimension),
      coords_(std::move(coords)),
      source_edges_(std::move(source_edges)) {
  if (num_vertices_ < 1) throw GraphError("graph needs at least one vertex");
  for (const Edge& e : edges_)
    if (e.u < 0 || e.v < 0 || e.u >= num_vertices_ || e.v >= num_vertices_)
      throw GraphError("edge endpoint is not a vertex");
  is_boundary_.assign(num_vertices_, 0);
  for (VertexId b : boundary_) {
    if (b < 0 || b >= num_vertices_) throw GraphError("boundary vertex is not a vertex");
    is_boundary_[b] = 1;
  }
  if (dimension_ > 0) {
    if (coords_.size() != static_cast<size_t>(num_vertices_))
      throw GraphError("coordinate list does not match vertex count");
    for (const Point& x : coords_)
      if (!x.empty() && x.size() != static_cast<size_t>(dimension_))
        throw GraphError("coordinate has wrong dimension");
  } else {
    coords_.clear();
  }
  if (source_edges_.empty()) {
    source_edges_.resize(edges_.size());
    std::iota(source_edges_.begin(), source_edges_.end(), 0);
  } else if (source_edges_.size() != edges_.size()) {
    throw GraphError("source edge list does not match edge count");
  }

  incidence_.assign(num_vertices_, {});
  for (EdgeId e = 0; e < num_edges(); ++e) {
    incidence_[edges_[e].u].push_back(e);
    if (edges_[e].v != edges_[e].u) incidence_[edges_[e].v].push_back(e);
  }

  std::vector<char> seen(num_vertices_, 0);
  std::queue<VertexId> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const VertexId x = frontier.front();
    frontier.pop();
    for (EdgeId e : incidence_[x]) {
      const VertexId y = edges_[e].u == x ? edges_[e].v : edges_[e].u;
      if (!seen[y]) {
        seen[y] = 1;
        ++reached;
        frontier.push(y);
      }
    }
  }
  if (reached != num_vertices_) throw GraphError("graph is not connected");
}

std::vector<int> FiniteGraph::degrees() const {
  std::vector<int> deg(num_vertices_, 0);
  for (const Edge& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg;
}

std::optional<VertexId> FiniteGraph::find_vertex(const Point& x) const {
  if (dimension_ == 0 || x.size() != static_cast<size_t>(dimension_)) return std::nullopt;
  // Boxes and grids are stored in lexicographic coordinate order.
  auto it = std::lower_bound(coords_.begin(), coords_.end(), x, [](const Point& a, const Point& b) {
    if (a.empty()) return !b.empty();
    if (b.empty()) return false;
    return a < b;
  });
  if (it != coords_.end() && *it == x) return static_cast<VertexId>(it - coords_.begin());
  for (VertexId v = 0; v < num_vertices_; ++v)
    if (coords_[v] == x) return v;
  return std::nullopt;
}

std::optional<EdgeId> FiniteGraph::find_edge(VertexId a, VertexId b) const {
  for (EdgeId e : incidence_.at(a)) {
    const Edge& ed = edges_[e];
    if ((ed.u == a && ed.v == b) || (ed.u == b && ed.v == a)) return e;
  }
  return std::nullopt;
}

std::uint64_t FiniteGraph::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(num_vertices_));
  mix(edges_.size());
  for (const Edge& e : edges_) {
    mix(static_cast<std::uint64_t>(e.u));
    mix(static_cast<std::uint64_t>(e.v));
  }
  return h;
}

FiniteGraph build_box(int dimension, int radius, bool wired) {
  if (dimension < 1) throw GraphError("box dimension must be >= 1");
  if (radius < 1) throw GraphError("box radius must be >= 1");
  const int side = 2 * radius + 1;
  long long count = 1;
  for (int i = 0; i < dimension; ++i) {
    count *= side;
    if (count > 50'000'000) throw GraphError("box too large");
  }
  const int n = static_cast<int>(count);

  std::vector<int> stride(dimension, 1);
  for (int i = dimension - 2; i >= 0; --i) stride[i] = stride[i + 1] * side;

  std::vector<Point> coords(n);
  std::vector<VertexId> boundary;
  std::vector<Edge> edges;
  Point x(dimension, -radius);
  for (int v = 0; v < n; ++v) {
    coords[v] = x;
    bool on_boundary = false;
    for (int i = 0; i < dimension; ++i) {
      if (x[i] == radius || x[i] == -radius) on_boundary = true;
      if (x[i] < radius) edges.push_back({v, v + stride[i]});
    }
    if (on_boundary) boundary.push_back(v);
    for (int i = dimension - 1; i >= 0; --i) {
      if (++x[i] <= radius) break;
      x[i] = -radius;
    }
  }
  FiniteGraph box(n, std::move(edges), std::move(boundary), dimension, std::move(coords));
  if (!wired) return box;
  std::vector<VertexId> bnd = box.boundary();
  return contract_vertices(box, bnd).graph;
}

FiniteGraph build_grid(int rows, int cols) {
  if (rows < 1 || cols < 1 || rows * cols < 2) throw GraphError("grid needs at least two vertices");
  std::vector<Point> coords;
  std::vector<Edge> edges;
  auto id = [rows](int c, int r) { return c * rows + r; };
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) coords.push_back({c, r});
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      if (c + 1 < cols) edges.push_back({id(c, r), id(c + 1, r)});
      if (r + 1 < rows) edges.push_back({id(c, r), id(c, r + 1)});
    }
  return FiniteGraph(rows * cols, std::move(edges), {}, 2, std::move(coords));
}

FiniteGraph build_path(int num_vertices) {
  if (num_vertices < 2) throw GraphError("path needs at least two vertices");
  std::vector<Edge> edges;
  for (int v = 0; v + 1 < num_vertices; ++v) edges.push_back({v, v + 1});
  return FiniteGraph(num_vertices, std::move(edges));
}

FiniteGraph build_cycle(int num_vertices) {
  if (num_vertices < 3) throw GraphError("cycle needs at least three vertices");
  std::vector<Edge> edges;
  for (int v = 0; v < num_vertices; ++v) edges.push_back({std::min(v, (v + 1) % num_vertices),
                                                          std::max(v, (v + 1) % num_vertices)});
  return FiniteGraph(num_vertices, std::move(edges));
}

FiniteGraph build_complete(int num_vertices) {
  if (num_vertices < 2) throw GraphError("complete graph needs at least two vertices");
  std::vector<Edge> edges;
  for (int a = 0; a < num_vertices; ++a)
    for (int b = a + 1; b < num_vertices; ++b) edges.push_back({a, b});
  return FiniteGraph(num_vertices, std::move(edges));
}

FiniteGraph build_triangle() {
  return FiniteGraph(3, {{0, 1}, {0, 2}, {1, 2}}, {}, 2, {{0, 0}, {0, 1}, {1, 0}});
}

FiniteGraph build_star(int leaves) {
  if (leaves < 1) throw GraphError("star needs at least one leaf");
  std::vector<Edge> edges;
  std::vector<VertexId> boundary;
  for (int i = 1; i <= leaves; ++i) {
    edges.push_back({0, i});
    boundary.push_back(i);
  }
  return FiniteGraph(leaves + 1, std::move(edges), std::move(boundary));
}

FiniteGraph builtin_graph(const std::string& name) {
  if (name == "triangle") return build_triangle();
  if (name == "c4") return build_cycle(4);
  if (name == "k4") return build_complete(4);
  if (name == "path3") return build_path(3);
  if (name == "grid2x2") return build_grid(2, 2);
  if (name == "grid2x3") return build_grid(2, 3);
  if (name == "wired1") return build_box(2, 1, true);
  if (name == "star4") return build_star(4);
  if (name.rfind("box:", 0) == 0) {
    int d = 0, n = 0;
    char bc[16] = {0};
    if (std::sscanf(name.c_str(), "box:%d:%d:%15s", &d, &n, bc) == 3) {
      const std::string kind(bc);
      if (kind == "free" || kind == "wired") return build_box(d, n, kind == "wired");
    }
  }
  throw GraphError("unknown builtin graph '" + name + "'");
}

Contraction contract_edges(const FiniteGraph& g, std::span<const EdgeId> edges) {
  UnionFind uf(g.num_vertices());
  for (EdgeId e : edges) uf.unite(g.edge(e).u, g.edge(e).v);
  return contract_by(g, uf);
}

Contraction contract_vertices(const FiniteGraph& g, std::span<const VertexId> vertices) {
  UnionFind uf(g.num_vertices());
  for (size_t i = 1; i < vertices.size(); ++i) uf.unite(vertices[0], vertices[i]);
  return contract_by(g, uf);
}

Contraction edge_subgraph(const FiniteGraph& g, std::span<const EdgeId> edges) {
  std::vector<char> keep(g.num_edges(), 0);
  std::vector<char> used(g.num_vertices(), 0);
  for (EdgeId e : edges) {
    keep.at(e) = 1;
    used[g.edge(e).u] = used[g.edge(e).v] = 1;
  }
  std::vector<VertexId> vertex_map(g.num_vertices(), -1);
  int next = 0;
  for (int v = 0; v < g.num_vertices(); ++v)
    if (used[v]) vertex_map[v] = next++;
  if (next == 0) throw GraphError("empty subgraph");

  Contraction out{FiniteGraph(1, {}), vertex_map, std::vector<std::optional<EdgeId>>(g.num_edges()), {}};
  std::vector<Edge> sub;
  std::vector<EdgeId> sources;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    if (!keep[e]) continue;
    out.edge_map[e] = static_cast<EdgeId>(sub.size());
    out.edge_origin.push_back(e);
    sub.push_back({vertex_map[g.edge(e).u], vertex_map[g.edge(e).v]});
    sources.push_back(g.source_edge(e));
  }
  std::vector<VertexId> boundary;
  for (VertexId b : g.boundary())
    if (used[b]) boundary.push_back(vertex_map[b]);
  std::vector<Point> coords;
  if (g.dimension() > 0)
    for (int v = 0; v < g.num_vertices(); ++v)
      if (used[v]) coords.push_back(g.coordinate(v));
  out.graph = FiniteGraph(next, std::move(sub), std::move(boundary), g.dimension(), std::move(coords),
                          std::move(sources));
  return out;
}

FiniteGraph read_graph(std::istream& in) {
  std::string line;
  int n = -1, m = -1, d = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (std::sscanf(line.c_str(), "graph v=%d e=%d d=%d", &n, &m, &d) != 3)
      throw GraphError("expected header 'graph v=<n> e=<m> d=<dim>'");
    break;
  }
  if (n < 1 || m < 0 || d < 0) throw GraphError("missing or invalid graph header");

  std::vector<Edge> edges;
  std::vector<VertexId> boundary;
  std::vector<Point> coords(d > 0 ? n : 0);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "boundary:") {
      VertexId b;
      while (ls >> b) boundary.push_back(b);
    } else if (head == "coord") {
      VertexId v;
      if (!(ls >> v) || v < 0 || v >= n || d == 0) throw GraphError("bad coord line: " + line);
      Point x(d);
      for (int& c : x)
        if (!(ls >> c)) throw GraphError("bad coord line: " + line);
      coords[v] = std::move(x);
    } else {
      std::istringstream es(line);
      Edge e;
      std::string rest;
      if (!(es >> e.u >> e.v) || (es >> rest)) throw GraphError("bad edge line: " + line);
      edges.push_back(e);
    }
  }
  if (static_cast<int>(edges.size()) != m) throw GraphError("edge count does not match header");
  return FiniteGraph(n, std::move(edges), std::move(boundary), d, std::move(coords));
}

void write_graph(std::ostream& out, const FiniteGraph& g) {
  out << "graph v=" << g.num_vertices() << " e=" << g.num_edges() << " d=" << g.dimension() << "\n";
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (!g.has_coordinate(v)) continue;
    out << "coord " << v;
    for (int c : g.coordinate(v)) out << ' ' << c;
    out << "\n";
  }
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << "\n";
  out << "boundary:";
  for (VertexId b : g.boundary()) out << ' ' << b;
  out << "\n";
}

FiniteGraph load_graph(const std::string& name_or_path) {
  std::ifstream file(name_or_path);
  if (file) return read_graph(file);
  return builtin_graph(name_or_path);
}

}  // namespace detcond
