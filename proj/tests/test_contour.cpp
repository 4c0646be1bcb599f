#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "detcond/contour.hpp"
#include "detcond/duality.hpp"

using namespace detcond;

namespace {

constexpr int kDirs[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

// Dual bond crossing tail -> head with the tail on its left, computed in
// doubled coordinates.
DualBond dual_of(const Site& tail, const Site& head) {
  const int dx = head[0] - tail[0], dy = head[1] - tail[1];
  const int mx = tail[0] + head[0], my = tail[1] + head[1];
  const int rx = -dy, ry = dx;
  return {DualSite{(mx - rx - 1) / 2, (my - ry - 1) / 2}, DualSite{(mx + rx - 1) / 2, (my + ry - 1) / 2}};
}

// Connected site sets containing `a` with at most `max_size` sites.
const std::set<std::vector<Site>>& animals_containing(const Site& a, int max_size) {
  static std::map<std::pair<Site, int>, std::set<std::vector<Site>>> cache;
  auto [it, fresh] = cache.try_emplace({a, max_size});
  if (!fresh) return it->second;
  auto& all = it->second;
  std::set<std::vector<Site>> level{{a}};
  while (!level.empty()) {
    std::set<std::vector<Site>> next;
    for (const auto& s : level) {
      all.insert(s);
      if (static_cast<int>(s.size()) == max_size) continue;
      for (const Site& x : s)
        for (const auto& d : kDirs) {
          const Site y{x[0] + d[0], x[1] + d[1]};
          if (std::binary_search(s.begin(), s.end(), y)) continue;
          auto t = s;
          t.insert(std::upper_bound(t.begin(), t.end(), y), y);
          next.insert(std::move(t));
        }
    }
    level = std::move(next);
  }
  return all;
}

bool connected_without(const std::vector<Site>& s, const std::set<Bond>& removed) {
  std::set<Site> seen{s.front()};
  std::vector<Site> stack{s.front()};
  while (!stack.empty()) {
    const Site x = stack.back();
    stack.pop_back();
    for (const auto& d : kDirs) {
      const Site y{x[0] + d[0], x[1] + d[1]};
      if (!std::binary_search(s.begin(), s.end(), y) || removed.count(undirected(x, y))) continue;
      if (seen.insert(y).second) stack.push_back(y);
    }
  }
  return seen.size() == s.size();
}

bool dual_connected(const std::vector<DualBond>& bonds) {
  std::map<DualSite, DualSite> parent;
  std::function<DualSite(DualSite)> find = [&](DualSite z) {
    auto it = parent.find(z);
    if (it == parent.end()) return parent[z] = z;
    return it->second == z ? z : it->second = find(it->second);
  };
  for (const auto& b : bonds) parent[find(b.from)] = find(b.to);
  std::set<DualSite> roots;
  for (const auto& b : bonds) roots.insert(find(b.from));
  return roots.size() == 1;
}

// Contours around bond {a, b} up to max_len, as directed dual bond sets:
// a site set S whose crossed bonds are its edge boundary plus slits inside
// S (crossed both ways) that keep S connected, with a connected dual path.
std::set<std::vector<DualBond>> oracle_contours(const Site& a, const Site& b, int max_len, int radius) {
  std::set<std::vector<DualBond>> out;
  auto in_box = [&](const Site& x) { return std::abs(x[0]) <= radius && std::abs(x[1]) <= radius; };
  const int max_area = max_len * max_len / 16;
  for (const auto& s : animals_containing(a, max_area)) {
    if (!std::binary_search(s.begin(), s.end(), b)) continue;
    std::vector<DualBond> perimeter;
    std::vector<Bond> inner;
    bool fits = true;
    for (const Site& x : s) {
      if (!in_box(x)) fits = false;
      for (const auto& d : kDirs) {
        const Site y{x[0] + d[0], x[1] + d[1]};
        if (!std::binary_search(s.begin(), s.end(), y)) {
          perimeter.push_back(dual_of(x, y));
          if (!in_box(y)) fits = false;
        } else if (x < y && undirected(x, y) != undirected(a, b)) {
          inner.push_back(undirected(x, y));
        }
      }
    }
    const int length = static_cast<int>(perimeter.size());
    if (!fits || length > max_len) continue;
    const int max_slits = (max_len - length) / 2;
    std::function<void(std::size_t, std::set<Bond>&)> choose = [&](std::size_t from, std::set<Bond>& slits) {
      if (connected_without(s, slits)) {
        std::vector<DualBond> bonds = perimeter;
        for (const Bond& t : slits) {
          bonds.push_back(dual_of(t[0], t[1]));
          bonds.push_back(dual_of(t[1], t[0]));
        }
        if (dual_connected(bonds)) {
          std::sort(bonds.begin(), bonds.end());
          out.insert(bonds);
        }
      }
      if (static_cast<int>(slits.size()) == max_slits) return;
      for (std::size_t i = from; i < inner.size(); ++i) {
        slits.insert(inner[i]);
        choose(i + 1, slits);
        slits.erase(inner[i]);
      }
    };
    std::set<Bond> none;
    choose(0, none);
  }
  return out;
}

std::set<std::vector<DualBond>> enumerated(const FiniteGraph& box, EdgeId e, int max_len) {
  std::set<std::vector<DualBond>> out;
  for (const auto& c : enumerate_contours_around(box, e, max_len).contours) out.insert(c.bond_set());
  return out;
}

Contour contour_of(const std::vector<DualSite>& walk) {
  const auto c = Contour::from_walk(walk);
  REQUIRE(c.has_value());
  return *c;
}

}  // namespace

TEST_CASE("unit square contour") {
  const auto c = contour_of({{0, 0}, {0, 1}, {-1, 1}, {-1, 0}});
  CHECK(c.length() == 4);
  REQUIRE(c.interior().size() == 1);
  CHECK(c.interior()[0] == Site{0, 1});
  CHECK(c.crossed().size() == 4);

  CHECK_FALSE(Contour::from_walk({{0, 0}, {1, 0}, {0, 0}, {1, 0}}).has_value());
  CHECK_FALSE(Contour::from_walk({{0, 0}, {2, 0}, {2, 1}, {0, 1}}).has_value());
  // Clockwise: the tails lie outside.
  CHECK_FALSE(Contour::from_walk({{0, 0}, {-1, 0}, {-1, 1}, {0, 1}}).has_value());
}

TEST_CASE("rotation to the smallest start") {
  const auto a = contour_of({{1, 1}, {1, 2}, {0, 2}, {0, 1}});
  const auto b = contour_of({{0, 2}, {0, 1}, {1, 1}, {1, 2}});
  CHECK(a == b);
  CHECK(a.dual_vertices().front() == DualSite{0, 1});
}

TEST_CASE("enumeration lengths") {
  const auto box = build_box(2, 5, false);
  const EdgeId e = central_edge(box);
  const auto short5 = enumerate_contours_around(box, e, 5);
  CHECK(short5.contours.empty());
  CHECK(short5.too_short);

  const auto six = enumerate_contours_around(box, e, 6);
  REQUIRE(six.contours.size() == 1);
  const auto& hex = six.contours[0];
  CHECK(hex.length() == 6);
  CHECK(hex.interior() == std::vector<Site>{{0, 0}, {1, 0}});
}

TEST_CASE("enumeration matches lattice animal oracle") {
  const auto box = build_box(2, 6, false);
  const EdgeId e = central_edge(box);
  const auto [a, b] = edge_sites(box, e);
  for (int len : {6, 8, 10, 12}) {
    const auto got = enumerated(box, e, len);
    const auto want = oracle_contours(a, b, len, 6);
    CHECK(got.size() == want.size());
    CHECK(got == want);
  }
  // Boxes too small for the longer contours.
  const auto small = build_box(2, 2, false);
  const EdgeId es = central_edge(small);
  CHECK(enumerated(small, es, 12) == oracle_contours(a, b, 12, 2));

  // A vertical edge.
  const auto vert = lattice_edge(box, {0, 0}, 1);
  REQUIRE(vert.has_value());
  const auto [va, vb] = edge_sites(box, vert->edge);
  CHECK(enumerated(box, vert->edge, 10) == oracle_contours(va, vb, 10, 6));
}

TEST_CASE("slit through a square block") {
  // The 2x2 block {0,1}^2 with the top bond crossed both ways.
  const auto c = contour_of({{-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {0, 0}, {0, 1}, {-1, 1}, {-1, 0}});
  CHECK(c.length() == 10);
  CHECK(c.interior().size() == 4);
  CHECK(c.is_crossed(undirected({0, 1}, {1, 1})));
  CHECK_FALSE(c.interior_bond(undirected({0, 1}, {1, 1})));
  CHECK(c.interior_bond(undirected({0, 0}, {1, 0})));
  // Turning off at the centre instead of returning cuts off a corner.
  const auto ell = contour_of({{-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {0, 0}, {-1, 0}});
  CHECK(ell.interior() == std::vector<Site>{{0, 0}, {1, 0}, {1, 1}});
}

TEST_CASE("q-contours: rectangle, and annulus with a slit around a nested contour") {
  const auto box = build_box(2, 6, false);
  auto edge = [&](Site x, Site y) {
    const auto u = box.find_vertex({x[0], x[1]});
    const auto v = box.find_vertex({y[0], y[1]});
    REQUIRE(u.has_value());
    REQUIRE(v.has_value());
    return *box.find_edge(*u, *v);
  };

  SUBCASE("3x2 block") {
    const auto c = contour_of({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {3, 1}, {3, 2}, {2, 2}, {1, 2}, {0, 2}, {0, 1}});
    CHECK(c.length() == 10);
    CHECK(c.interior().size() == 6);
    Configuration kappa(box.num_edges(), 1);
    for (int x = 1; x <= 3; ++x) {
      kappa[edge({x, 0}, {x, 1})] = 0;
      kappa[edge({x, 2}, {x, 3})] = 0;
    }
    for (int y = 1; y <= 2; ++y) {
      kappa[edge({0, y}, {1, y})] = 0;
      kappa[edge({3, y}, {4, y})] = 0;
    }
    kappa[edge({2, 1}, {2, 2})] = 0;
    const auto fp = contour_footprint(box, c);
    CHECK(fp.soft.size() == 10);
    CHECK(fp.hard.size() == 6);
    CHECK(is_q_contour(fp, kappa));
    CHECK(std::find(fp.hard.begin(), fp.hard.end(), edge({2, 1}, {2, 2})) == fp.hard.end());
    CHECK_FALSE(is_q_contour(fp, Configuration(box.num_edges(), 0)));
    auto broken = kappa;
    broken[edge({1, 1}, {2, 1})] = 0;
    CHECK_FALSE(is_q_contour(fp, broken));
  }

  SUBCASE("annulus with a slit and a nested contour") {
    const auto outer = contour_of({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {4, 1}, {4, 2}, {4, 3}, {3, 3}, {2, 3}, {2, 2},
                                   {3, 2}, {3, 1}, {2, 1}, {1, 1}, {1, 2}, {2, 2}, {2, 3}, {1, 3}, {0, 3}, {0, 2}, {0, 1}});
    const auto inner = contour_of({{1, 1}, {2, 1}, {3, 1}, {3, 2}, {2, 2}, {1, 2}});
    CHECK(outer.length() == 22);
    CHECK(inner.length() == 6);
    CHECK(outer.interior().size() == 10);
    CHECK_FALSE(outer.in_interior({2, 2}));
    CHECK(inner.interior() == std::vector<Site>{{2, 2}, {3, 2}});
    CHECK(outer.is_crossed(undirected({2, 3}, {3, 3})));
    CHECK(outer.in_interior({2, 3}));
    CHECK(outer.in_interior({3, 3}));

    Configuration kappa(box.num_edges(), 0);
    for (auto [x, y] : std::vector<std::pair<Site, Site>>{{{1, 1}, {2, 1}}, {{2, 1}, {3, 1}}, {{3, 1}, {4, 1}},
                                                         {{1, 1}, {1, 2}}, {{1, 2}, {1, 3}}, {{1, 3}, {2, 3}},
                                                         {{4, 1}, {4, 2}}, {{4, 2}, {4, 3}}, {{3, 3}, {4, 3}},
                                                         {{2, 2}, {3, 2}}})
      kappa[edge(x, y)] = 1;
    CHECK(is_q_contour(box, outer, kappa));
    CHECK(is_q_contour(box, inner, kappa));
    const auto fp = contour_footprint(box, outer);
    CHECK(std::find(fp.soft.begin(), fp.soft.end(), edge({2, 3}, {3, 3})) != fp.soft.end());
  }
}

TEST_CASE("footprint outside the box") {
  const auto box = build_box(2, 1, false);
  const auto c = contour_of({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {3, 1}, {3, 2}, {2, 2}, {1, 2}, {0, 2}, {0, 1}});
  CHECK_THROWS_AS(contour_footprint(box, c), GraphError);
}
