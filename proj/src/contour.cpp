#include "detcond/contour.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <map>
#include <set>
#include <unordered_set>

namespace detcond {

namespace {

constexpr std::array<std::array<int, 2>, 4> kDirections{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

bool adjacent(const DualSite& a, const DualSite& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1;
}

}  // namespace

PrimalBond crossed_bond(const DualBond& b) {
  // Doubled coordinates avoid halves: dual site (x,y) sits at (2x+1, 2y+1).
  const int dx = b.to.x - b.from.x, dy = b.to.y - b.from.y;
  const int mx = 2 * b.from.x + 1 + dx, my = 2 * b.from.y + 1 + dy;
  // Primal direction is the dual direction rotated clockwise.
  const int px = dy, py = -dx;
  return PrimalBond{Site{(mx - px) / 2, (my - py) / 2}, Site{(mx + px) / 2, (my + py) / 2}};
}

Bond undirected(const Site& a, const Site& b) { return a < b ? Bond{a, b} : Bond{b, a}; }

std::array<Bond, 4> plaquette_faces(const DualSite& z) {
  const Site a{z.x, z.y}, b{z.x + 1, z.y}, c{z.x, z.y + 1}, d{z.x + 1, z.y + 1};
  return {undirected(a, b), undirected(c, d), undirected(a, c), undirected(b, d)};
}

std::optional<Contour> Contour::from_walk(const std::vector<DualSite>& walk) {
  const size_t n = walk.size();
  if (n < 4) return std::nullopt;
  for (size_t i = 0; i < n; ++i)
    if (!adjacent(walk[i], walk[(i + 1) % n])) return std::nullopt;

  std::vector<DualBond> bonds(n);
  for (size_t i = 0; i < n; ++i) bonds[i] = {walk[i], walk[(i + 1) % n]};
  {
    auto sorted = bonds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return std::nullopt;
  }

  std::set<Site> tails;
  std::set<Bond> cut;
  int lo_x = walk[0].x, hi_x = walk[0].x, lo_y = walk[0].y, hi_y = walk[0].y;
  for (const DualBond& b : bonds) {
    const PrimalBond p = crossed_bond(b);
    tails.insert(p.tail);
    cut.insert(undirected(p.tail, p.head));
    lo_x = std::min(lo_x, b.from.x);
    hi_x = std::max(hi_x, b.from.x);
    lo_y = std::min(lo_y, b.from.y);
    hi_y = std::max(hi_y, b.from.y);
  }
  // Any bounded component lies within the bounding box of the dual path.
  lo_x -= 1, lo_y -= 1, hi_x += 2, hi_y += 2;

  const Site start = *tails.begin();
  std::set<Site> comp{start};
  std::deque<Site> queue{start};
  while (!queue.empty()) {
    const Site x = queue.front();
    queue.pop_front();
    for (const auto& d : kDirections) {
      const Site y{x[0] + d[0], x[1] + d[1]};
      if (cut.count(undirected(x, y))) continue;
      if (y[0] <= lo_x || y[0] >= hi_x || y[1] <= lo_y || y[1] >= hi_y) return std::nullopt;
      if (comp.insert(y).second) queue.push_back(y);
    }
  }

  // Inner boundary: sites of the component incident to a removed bond. A bond
  // crossed in both directions may join two interior sites.
  std::set<Site> inner_boundary;
  for (const Bond& b : cut)
    for (const Site& x : b)
      if (comp.count(x)) inner_boundary.insert(x);
  if (inner_boundary != tails) return std::nullopt;

  size_t best = 0;
  for (size_t r = 1; r < n; ++r)
    for (size_t i = 0; i < n; ++i) {
      const DualSite& a = walk[(r + i) % n];
      const DualSite& c = walk[(best + i) % n];
      if (a == c) continue;
      if (a < c) best = r;
      break;
    }

  Contour out;
  out.vertices_.resize(n);
  for (size_t i = 0; i < n; ++i) out.vertices_[i] = walk[(best + i) % n];
  for (size_t i = 0; i < n; ++i) {
    out.dual_bonds_.push_back({out.vertices_[i], out.vertices_[(i + 1) % n]});
    out.primal_bonds_.push_back(crossed_bond(out.dual_bonds_.back()));
  }
  out.crossed_.assign(cut.begin(), cut.end());
  out.interior_.assign(comp.begin(), comp.end());
  return out;
}

std::vector<DualSite> Contour::distinct_vertices() const {
  std::vector<DualSite> v = vertices_;
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool Contour::in_interior(const Site& x) const {
  return std::binary_search(interior_.begin(), interior_.end(), x);
}

bool Contour::is_crossed(const Bond& b) const { return std::binary_search(crossed_.begin(), crossed_.end(), b); }

bool Contour::interior_bond(const Bond& b) const {
  return in_interior(b[0]) && in_interior(b[1]) && !is_crossed(b);
}

std::vector<DualBond> Contour::bond_set() const {
  std::vector<DualBond> s = dual_bonds_;
  std::sort(s.begin(), s.end());
  return s;
}

std::array<Site, 2> edge_sites(const FiniteGraph& box, EdgeId e) {
  const Edge& ed = box.edge(e);
  if (box.dimension() != 2 || !box.has_coordinate(ed.u) || !box.has_coordinate(ed.v))
    throw GraphError("contours need an edge of a two-dimensional box");
  const Point& a = box.coordinate(ed.u);
  const Point& b = box.coordinate(ed.v);
  return {Site{a[0], a[1]}, Site{b[0], b[1]}};
}

namespace {

std::int64_t bond_key(const DualSite& a, const DualSite& b) {
  auto enc = [](const DualSite& s) {
    return (static_cast<std::int64_t>(s.x + 32768) << 16) | static_cast<std::int64_t>(s.y + 32768);
  };
  return (enc(a) << 32) | enc(b);
}

struct Search {
  const FiniteGraph* box = nullptr;
  Site a, b;
  int max_len = 0;
  DualSite origin;
  std::unordered_set<std::int64_t> used;
  std::unordered_set<std::int64_t> banned;
  std::vector<DualSite> path;
  std::map<std::vector<DualBond>, Contour> found;

  bool inside_box(const Site& x) const { return box->find_vertex(Point{x[0], x[1]}).has_value(); }

  void record() {
    auto c = Contour::from_walk(path);
    if (!c) return;
    if (!c->interior_bond(undirected(a, b))) return;
    for (const Site& x : c->interior())
      if (!inside_box(x)) return;
    for (const PrimalBond& p : c->primal_bonds())
      if (!inside_box(p.head)) return;
    auto key = c->bond_set();
    auto it = found.find(key);
    if (it == found.end())
      found.emplace(std::move(key), std::move(*c));
    else if (c->dual_vertices() < it->second.dual_vertices())
      it->second = std::move(*c);
  }

  void extend() {
    const DualSite cur = path.back();
    const int steps = static_cast<int>(path.size()) - 1;
    if (steps > 0 && cur == origin) {
      path.pop_back();
      record();
      path.push_back(cur);
    }
    if (steps == max_len) return;
    for (const auto& d : kDirections) {
      const DualSite next{cur.x + d[0], cur.y + d[1]};
      const int back = std::abs(next.x - origin.x) + std::abs(next.y - origin.y);
      if (back > max_len - steps - 1) continue;
      const auto key = bond_key(cur, next);
      if (banned.count(key) || used.count(key)) continue;
      used.insert(key);
      path.push_back(next);
      extend();
      path.pop_back();
      used.erase(key);
    }
  }
};

}  // namespace

ContourEnumeration enumerate_contours_around(const FiniteGraph& box, EdgeId e, int max_len) {
  const auto [a, b] = edge_sites(box, e);
  ContourEnumeration out;
  if (max_len < 6) {
    out.too_short = true;
    return out;
  }

  Search s;
  s.box = &box;
  s.a = a;
  s.b = b;
  s.max_len = max_len;
  // Every contour with a in its interior crosses the downward ray from a.
  // Its first crossing (smallest k) runs east across bond a-k e2 -> a-(k+1) e2;
  // bonds with smaller k are excluded to count each contour from one start.
  for (int k = 0; k <= max_len / 2; ++k) {
    const DualSite from{a[0] - 1, a[1] - k - 1};
    const DualSite to{a[0], a[1] - k - 1};
    s.origin = from;
    s.used = {bond_key(from, to)};
    s.path = {from, to};
    s.extend();
    s.banned.insert(bond_key(from, to));
  }

  for (auto& [key, c] : s.found) out.contours.push_back(std::move(c));
  std::sort(out.contours.begin(), out.contours.end(), [](const Contour& x, const Contour& y) {
    if (x.length() != y.length()) return x.length() < y.length();
    return x.dual_vertices() < y.dual_vertices();
  });
  return out;
}

}  // namespace detcond
