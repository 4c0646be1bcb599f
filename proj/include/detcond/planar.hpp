#pragma once

#include <vector>

#include "detcond/graph.hpp"

namespace detcond {

/// A dart is an edge traversed in one direction: side 0 leaves edge.u,
/// side 1 leaves edge.v.
struct Dart {
  EdgeId edge = 0;
  int side = 0;
  friend bool operator==(const Dart&, const Dart&) = default;
};

/// Combinatorial embedding: for each vertex, the darts leaving it in
/// counter-clockwise order.
struct PlaneGraph {
  FiniteGraph graph;
  std::vector<std::vector<Dart>> rotation;
};

/// Rotation system of a straight-line embedding in Z^2. Throws GraphError
/// when the graph has no 2d coordinates or two darts leave a vertex in the
/// same direction.
PlaneGraph embed_from_coordinates(const FiniteGraph& g);

struct PlanarDual {
  PlaneGraph dual;
  /// Face index (dual vertex) on each side of primal edge e: the face
  /// containing dart (e,0) is dual.graph.edge(e).u. Dual edge ids equal
  /// primal edge ids, so e <-> e* is the identity map on ids.
  int num_faces = 0;
};

/// Dual of a connected plane graph, one vertex per face including the outer
/// face. Throws GraphError if Euler's formula fails (embedding not planar).
PlanarDual planar_dual(const PlaneGraph& g);
PlanarDual planar_dual(const FiniteGraph& g);

/// Faces as cyclic dart sequences.
std::vector<std::vector<Dart>> faces(const PlaneGraph& g);

}  // namespace detcond
