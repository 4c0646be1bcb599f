#include <doctest.h>

#include <cmath>
#include <memory>

#include "detcond/duality.hpp"

using namespace detcond;

namespace {

std::shared_ptr<const FiniteGraph> shared(FiniteGraph g) { return std::make_shared<const FiniteGraph>(std::move(g)); }

}  // namespace

TEST_CASE("dual configurations") {
  const auto dm = make_dual_map(shared(build_grid(2, 2)));
  CHECK(dm.dual->num_vertices() == 2);
  CHECK(dm.dual->num_edges() == 4);
  CHECK(dual_configuration(dm, Configuration(4, 0)) == Configuration(4, 1));
  for (std::uint32_t b = 0; b < 16; ++b) {
    Configuration k(4);
    for (int e = 0; e < 4; ++e) k[e] = b >> e & 1u;
    const auto d = dual_configuration(dm, k);
    CHECK(dual_configuration(dm, d) == k);
    int h = 0;
    for (int e = 0; e < 4; ++e) h += k[e] + d[e];
    CHECK(h == 4);
  }
}

TEST_CASE("duality pushforward") {
  CHECK(check_duality_pushforward(build_grid(2, 2), 0.5, 4.0) <= 1e-10);
  CHECK(check_duality_pushforward(build_triangle(), 0.3, 2.0) <= 1e-10);
  CHECK(check_duality_pushforward(build_grid(2, 2), 0.3, 1.0) <= 1e-15);
  CHECK(check_duality_pushforward(build_grid(2, 3), self_dual_point(16.0), 16.0) <= 1e-10);
  CHECK(check_duality_pushforward(build_box(2, 1, false), 0.2, 9.0) <= 1e-10);
}

TEST_CASE("Peierls bound") {
  CHECK(peierls_bound(6, 1e20) == doctest::Approx(0.04096).epsilon(1e-10));
  CHECK(peierls_bound(11, std::pow(4.0, 8)) == doctest::Approx(256.0).epsilon(1e-12));
  CHECK(peierls_bound(6, 1e4) == doctest::Approx(409.6).epsilon(1e-10));
  CHECK(contour_sum_bound({{6, 1}, {8, 2}}, 1e20) ==
        doctest::Approx(peierls_bound(6, 1e20) + 2 * peierls_bound(8, 1e20)));
}

TEST_CASE("length six contour footprint") {
  const auto box = build_box(2, 3, false);
  const auto hex = enumerate_contours_around(box, central_edge(box), 6).contours.at(0);
  const auto fp = contour_footprint(box, hex);
  CHECK(fp.soft.size() == 6);
  REQUIRE(fp.hard.size() == 1);
  CHECK(fp.hard[0] == central_edge(box));
  CHECK_FALSE(is_q_contour(fp, Configuration(box.num_edges(), 0)));
  Configuration k(box.num_edges(), 0);
  k[central_edge(box)] = 1;
  CHECK(is_q_contour(fp, k));
  CHECK(product_frequency(fp, 0.3) == doctest::Approx(0.3 * std::pow(0.7, 6)));
}

TEST_CASE("contour frequencies at q = 1 follow the product measure") {
  const auto rep = estimate_contour_frequency(2, 0.4, 1.0, 8, 40000, 200, 3);
  const auto box = build_box(2, 2, false);
  const auto all = enumerate_contours_around(box, central_edge(box), 8).contours;
  REQUIRE(rep.contours.size() == all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double expect = product_frequency(contour_footprint(box, all[i]), 0.4);
    CHECK(std::abs(rep.contours[i].frequency - expect) <= 3.0 * rep.contours[i].stderr + 1e-12);
  }
  CHECK(!rep.classes.empty());
}

TEST_CASE("free-wired gap at q = 1") {
  const auto g = free_wired_gap(2, 0.5, 1.0, 4000, 100, {1, 2});
  CHECK(g.rows.size() == 4);
  CHECK(std::abs(g.gap) < 4.0 * g.gap_stderr + 1e-12);
  CHECK(std::abs(g.free_mean - 0.5) < 4.0 * g.free_stderr);
}
