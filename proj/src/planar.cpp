#include "detcond/planar.hpp"

#include <algorithm>
#include <cmath>

namespace detcond {

namespace {

int dart_index(const Dart& d) { return 2 * d.edge + d.side; }

VertexId dart_tail(const FiniteGraph& g, const Dart& d) {
  return d.side == 0 ? g.edge(d.edge).u : g.edge(d.edge).v;
}

}  // namespace

PlaneGraph embed_from_coordinates(const FiniteGraph& g) {
  if (g.dimension() != 2) throw GraphError("planar embedding needs 2d coordinates");
  for (VertexId v = 0; v < g.num_vertices(); ++v)
    if (!g.has_coordinate(v)) throw GraphError("planar embedding needs a coordinate for every vertex");

  std::vector<std::vector<std::pair<double, Dart>>> around(g.num_vertices());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    if (ed.u == ed.v) throw GraphError("self-loop has no straight-line embedding");
    const Point& a = g.coordinate(ed.u);
    const Point& b = g.coordinate(ed.v);
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    around[ed.u].push_back({std::atan2(dy, dx), Dart{e, 0}});
    around[ed.v].push_back({std::atan2(-dy, -dx), Dart{e, 1}});
  }
  PlaneGraph out{g, std::vector<std::vector<Dart>>(g.num_vertices())};
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    auto& list = around[v];
    std::sort(list.begin(), list.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (size_t i = 1; i < list.size(); ++i)
      if (list[i].first == list[i - 1].first) throw GraphError("two edges leave a vertex in the same direction");
    for (const auto& [angle, dart] : list) out.rotation[v].push_back(dart);
  }
  return out;
}

std::vector<std::vector<Dart>> faces(const PlaneGraph& pg) {
  const FiniteGraph& g = pg.graph;
  const int num_darts = 2 * g.num_edges();
  // Position of each dart inside the rotation list of its tail.
  std::vector<int> position(num_darts, -1);
  for (VertexId v = 0; v < g.num_vertices(); ++v)
    for (size_t i = 0; i < pg.rotation[v].size(); ++i) position[dart_index(pg.rotation[v][i])] = static_cast<int>(i);
  for (int i = 0; i < num_darts; ++i)
    if (position[i] < 0) throw GraphError("rotation system misses a dart");

  // Successor: reverse the dart, then step clockwise at the head vertex.
  auto next = [&](const Dart& d) {
    const Dart rev{d.edge, 1 - d.side};
    const auto& rot = pg.rotation[dart_tail(g, rev)];
    const int k = static_cast<int>(rot.size());
    return rot[(position[dart_index(rev)] + k - 1) % k];
  };

  std::vector<char> seen(num_darts, 0);
  std::vector<std::vector<Dart>> out;
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    for (int side = 0; side < 2; ++side) {
      Dart d{e, side};
      if (seen[dart_index(d)]) continue;
      std::vector<Dart> face;
      while (!seen[dart_index(d)]) {
        seen[dart_index(d)] = 1;
        face.push_back(d);
        d = next(d);
      }
      out.push_back(std::move(face));
    }
  return out;
}

PlanarDual planar_dual(const PlaneGraph& pg) {
  const FiniteGraph& g = pg.graph;
  const auto face_list = faces(pg);
  const int num_faces = static_cast<int>(face_list.size());
  if (g.num_vertices() - g.num_edges() + num_faces != 2)
    throw GraphError("embedding violates Euler's formula; graph is not plane");

  std::vector<int> face_of(2 * g.num_edges(), -1);
  for (int f = 0; f < num_faces; ++f)
    for (const Dart& d : face_list[f]) face_of[dart_index(d)] = f;

  std::vector<Edge> dual_edges(g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    dual_edges[e] = {face_of[dart_index({e, 0})], face_of[dart_index({e, 1})]};

  std::vector<std::vector<Dart>> rotation(num_faces);
  for (int f = 0; f < num_faces; ++f) rotation[f] = face_list[f];

  return PlanarDual{PlaneGraph{FiniteGraph(num_faces, std::move(dual_edges)), std::move(rotation)}, num_faces};
}

PlanarDual planar_dual(const FiniteGraph& g) { return planar_dual(embed_from_coordinates(g)); }

}  // namespace detcond
