#pragma once

#include <array>
#include <compare>
#include <optional>
#include <vector>

#include "detcond/graph.hpp"

namespace detcond {

/// Site of Z^2.
using Site = std::array<int, 2>;

/// Site of the dual lattice: (x + 1/2, y + 1/2).
struct DualSite {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const DualSite&, const DualSite&) = default;
};

struct DualBond {
  DualSite from;
  DualSite to;
  friend auto operator<=>(const DualBond&, const DualBond&) = default;
};

/// Directed primal bond tail -> head.
struct PrimalBond {
  Site tail;
  Site head;
  friend auto operator<=>(const PrimalBond&, const PrimalBond&) = default;
};

/// The primal bond crossed by a dual bond. The dual bond is the primal bond
/// rotated counter-clockwise by 90 degrees, so the tail lies on its left.
PrimalBond crossed_bond(const DualBond& b);

/// Undirected unit bond {a, b} with a < b lexicographically.
using Bond = std::array<Site, 2>;
Bond undirected(const Site& a, const Site& b);

/// The four faces of the plaquette centred at a dual site.
std::array<Bond, 4> plaquette_faces(const DualSite& z);

/// Closed dual path along pairwise distinct directed dual bonds that bounds
/// a finite component int(gamma) of Z^2 minus the crossed bonds whose inner
/// boundary (sites incident to a crossed bond) is exactly the set of tails.
/// A bond crossed in both directions (a slit) may join two interior sites.
class Contour {
 public:
  /// Validates the walk (closing bond implied) and rotates it to its
  /// lexicographically smallest starting point. nullopt if not a contour.
  static std::optional<Contour> from_walk(const std::vector<DualSite>& walk);

  int length() const { return static_cast<int>(dual_bonds_.size()); }
  const std::vector<DualSite>& dual_vertices() const { return vertices_; }
  const std::vector<DualBond>& dual_bonds() const { return dual_bonds_; }
  const std::vector<PrimalBond>& primal_bonds() const { return primal_bonds_; }
  /// Undirected crossed bonds E(gamma), sorted, without repeats.
  const std::vector<Bond>& crossed() const { return crossed_; }
  /// int(gamma), sorted.
  const std::vector<Site>& interior() const { return interior_; }
  /// Distinct dual vertices V(gamma)*, sorted.
  std::vector<DualSite> distinct_vertices() const;

  bool in_interior(const Site& x) const;
  bool is_crossed(const Bond& b) const;
  /// b belongs to E(int(gamma)): both ends inside and b not crossed.
  bool interior_bond(const Bond& b) const;

  /// Directed dual bonds sorted; identifies the contour as a set.
  std::vector<DualBond> bond_set() const;

  friend bool operator==(const Contour& a, const Contour& b) { return a.vertices_ == b.vertices_; }

 private:
  std::vector<DualSite> vertices_;
  std::vector<DualBond> dual_bonds_;
  std::vector<PrimalBond> primal_bonds_;
  std::vector<Bond> crossed_;
  std::vector<Site> interior_;
};

struct ContourEnumeration {
  std::vector<Contour> contours;
  /// Set when max_len < 6: no contour can surround an edge.
  bool too_short = false;
};

/// All contours of length <= max_len with e in E(int(gamma)), lying inside
/// the free d=2 box. Contours with the same directed bond set are reported
/// once. Sorted by length, then lexicographically by dual vertex sequence.
ContourEnumeration enumerate_contours_around(const FiniteGraph& box, EdgeId e, int max_len);

/// Endpoints of a box edge as lattice sites.
std::array<Site, 2> edge_sites(const FiniteGraph& box, EdgeId e);

}  // namespace detcond
