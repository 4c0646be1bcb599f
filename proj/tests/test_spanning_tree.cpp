#include <doctest.h>

#include <bit>
#include <cmath>
#include <map>
#include <memory>

#include "detcond/spanning_tree.hpp"

using namespace detcond;

namespace {

// Tree check by union-find over all (|V|-1)-subsets, independent of the
// deletion/contraction recursion.
bool is_spanning_tree(const FiniteGraph& g, std::uint32_t mask) {
  if (std::popcount(mask) != g.num_vertices() - 1) return false;
  std::vector<int> parent(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v) parent[v] = v;
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (int e = 0; e < g.num_edges(); ++e) {
    if (!(mask >> e & 1u)) continue;
    const int a = find(g.edge(e).u), b = find(g.edge(e).v);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

std::vector<std::uint32_t> subset_trees(const FiniteGraph& g) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t m = 0; m < (1u << g.num_edges()); ++m)
    if (is_spanning_tree(g, m)) out.push_back(m);
  return out;
}

std::shared_ptr<const FiniteGraph> shared(FiniteGraph g) { return std::make_shared<const FiniteGraph>(std::move(g)); }

}  // namespace

TEST_CASE("tree counts") {
  CHECK(spanning_trees(build_complete(4)).size() == 16);
  CHECK(spanning_trees(build_cycle(4)).size() == 4);
  CHECK(spanning_trees(build_triangle()).size() == 3);
  CHECK(spanning_trees(build_path(3)).size() == 1);
  CHECK(kirchhoff_sum(build_triangle(), {1.0, 1.0, 1.0}) == doctest::Approx(9.0));
  CHECK(kirchhoff_sum(build_triangle(), {2.0, 1.0, 1.0}) == doctest::Approx(15.0));
  CHECK(kirchhoff_sum(FiniteGraph(2, {{0, 1}}), {4.0}) == doctest::Approx(8.0));
}

TEST_CASE("enumeration matches subset oracle") {
  for (const auto& g : {build_complete(4), build_grid(2, 3), build_box(2, 1, true), build_grid(3, 3)}) {
    auto trees = spanning_trees(g);
    std::sort(trees.begin(), trees.end());
    CHECK(trees == subset_trees(g));
  }
}

TEST_CASE("size cap") {
  CHECK_THROWS_AS(spanning_trees(build_grid(3, 4)), SizeCapError);
}

TEST_CASE("tree measure marginals") {
  TreeMeasure tri(shared(build_triangle()), {1.0, 1.0, 1.0});
  CHECK(tri.edge_marginal(0) == doctest::Approx(2.0 / 3.0));
  CHECK(tri.pair_correlation(0, 1) == doctest::Approx(-1.0 / 9.0));

  TreeMeasure triq(shared(build_triangle()), {2.0, 1.0, 1.0});
  CHECK(triq.edge_marginal(0) == doctest::Approx(0.8));

  TreeMeasure path(shared(build_path(4)), {1.0, 3.0, 2.0});
  CHECK(path.edge_marginal(1) == doctest::Approx(1.0));
  CHECK(path.pair_correlation(0, 2) == doctest::Approx(0.0));

  TreeMeasure c4(shared(build_cycle(4)), {1.0, 1.0, 1.0, 1.0});
  CHECK(c4.joint_marginal(0, 1) == doctest::Approx(0.5));
  CHECK(c4.pair_correlation(0, 1) == doctest::Approx(-1.0 / 16.0));
}

TEST_CASE("large graphs use currents") {
  auto g = shared(build_box(2, 2, false));
  std::vector<double> w(g->num_edges());
  for (int e = 0; e < g->num_edges(); ++e) w[e] = e % 3 == 0 ? 4.0 : 1.0;
  TreeMeasure m(g, w);
  CHECK(!m.enumerable());
  double total = 0.0;
  for (EdgeId e = 0; e < g->num_edges(); ++e) total += m.edge_marginal(e);
  CHECK(total == doctest::Approx(g->num_vertices() - 1.0));
  CHECK(m.pair_correlation(0, 1) <= 0.0);
}

TEST_CASE("wilson frequencies") {
  const auto tri = build_triangle();
  for (const auto& w : {std::vector<double>{1.0, 1.0, 1.0}, std::vector<double>{2.0, 1.0, 1.0}}) {
    Rng rng(2024);
    const int n = 100000;
    std::map<std::uint32_t, int> counts;
    for (int s = 0; s < n; ++s) {
      const auto t = sample_tree(tri, w, rng);
      std::uint32_t m = 0;
      for (int e = 0; e < 3; ++e)
        if (t[e]) m |= 1u << e;
      REQUIRE(is_spanning_tree(tri, m));
      ++counts[m];
    }
    const double total = w[0] * w[1] + w[0] * w[2] + w[1] * w[2];
    for (const auto& [m, c] : counts) {
      double weight = 1.0;
      for (int e = 0; e < 3; ++e)
        if (m >> e & 1u) weight *= w[e];
      const double p = weight / total;
      const double sigma = std::sqrt(p * (1 - p) / n);
      CHECK(std::abs(static_cast<double>(c) / n - p) < 3.5 * sigma);
    }
  }
  const auto single = sample_tree(FiniteGraph(2, {{0, 1}}), {1.0}, *std::make_unique<Rng>(1));
  CHECK(single[0] == 1);
}
