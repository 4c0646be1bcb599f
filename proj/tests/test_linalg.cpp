#include <doctest.h>

#include <cmath>
#include <memory>

#include "detcond/laplacian.hpp"
#include "detcond/random.hpp"
#include "detcond/spanning_tree.hpp"
#include "oracles.hpp"

using namespace detcond;

namespace {

FiniteGraph single_edge() { return FiniteGraph(2, {{0, 1}}, {}, 1, {{0}, {1}}); }

}  // namespace

TEST_CASE("log det examples") {
  CHECK(log_det_zero_mean(single_edge(), std::vector<double>{3.0}) == doctest::Approx(std::log(6.0)));
  CHECK(log_det_zero_mean(build_triangle(), std::vector<double>(3, 1.0)) == doctest::Approx(std::log(9.0)));
  CHECK(log_det_zero_mean(build_cycle(4), std::vector<double>(4, 1.0)) == doctest::Approx(std::log(16.0)));
  CHECK(log_det_zero_mean(build_triangle(), std::vector<double>{2.0, 1.0, 1.0}) ==
        doctest::Approx(std::log(15.0)));
  CHECK(log_det_zero_mean(single_edge(), std::vector<double>{4.0}) == doctest::Approx(std::log(8.0)));
}

TEST_CASE("log det agrees with eigenvalues") {
  for (const auto& g : {build_complete(4), build_grid(2, 3), build_box(2, 1, true), build_box(2, 2, false)}) {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> w(g.num_edges());
      for (double& x : w) x = uniform01(rng) < 0.5 ? 1.0 : 7.5;
      CHECK(log_det_zero_mean(g, w) == doctest::Approx(oracle::log_det_eigen(g, w)).epsilon(1e-11));
    }
  }
}

TEST_CASE("effective resistance in series and parallel") {
  CHECK(effective_resistance(build_path(3), {2.0, 3.0}, 0) == doctest::Approx(0.5));
  CHECK(effective_resistance(build_triangle(), {1.0, 1.0, 1.0}, 0) == doctest::Approx(2.0 / 3.0));
  const FiniteGraph twin(2, {{0, 1}, {0, 1}});
  CHECK(effective_resistance(twin, {1.0, 3.0}, 0) == doctest::Approx(0.25));
  CHECK(effective_resistance(build_cycle(4), {1.0, 1.0, 1.0, 1.0}, 0) == doctest::Approx(0.75));
}

TEST_CASE("transfer current examples") {
  const auto tri = build_triangle();
  const Conductances unit = Conductances::all_soft(3, 2.0);
  CHECK(transfer_current(tri, unit, 0, 0) == doctest::Approx(2.0 / 3.0));
  for (EdgeId f = 0; f < 3; ++f)
    for (EdgeId g = 0; g < 3; ++g)
      if (f != g) CHECK(std::abs(transfer_current(tri, unit, f, g)) == doctest::Approx(1.0 / 3.0));
  CHECK(transfer_current(single_edge(), std::vector<double>{5.0}, 0, 0) == doctest::Approx(1.0));
}

TEST_CASE("transfer current matches pseudo-inverse") {
  for (const auto& g : {build_complete(4), build_grid(2, 3), build_box(2, 1, true)}) {
    std::vector<double> w(g.num_edges());
    for (int e = 0; e < g.num_edges(); ++e) w[e] = 1.0 + e % 3;
    const auto Lp = oracle::pseudo_inverse(g, w);
    for (EdgeId f = 0; f < g.num_edges(); ++f)
      for (EdgeId h = 0; h < g.num_edges(); ++h) {
        const double expect = w[h] * oracle::incidence(g, h).dot(Lp * oracle::incidence(g, f));
        CHECK(transfer_current(g, w, f, h) == doctest::Approx(expect).epsilon(1e-10));
      }
  }
}

TEST_CASE("green gradient") {
  const auto e = single_edge();
  for (double c : {1.0, 2.0, 5.0})
    CHECK(green_gradient(e, {c}, {0}, 0, {0}, 0) == doctest::Approx(1.0 / c));

  const auto box = build_box(2, 3, true);
  std::vector<double> w(box.num_edges());
  for (int k = 0; k < box.num_edges(); ++k) w[k] = k % 2 ? 2.0 : 1.0;
  const Point x{0, 0}, y{1, -1};
  CHECK(green_gradient(box, w, x, 0, y, 1) == green_gradient(box, w, y, 1, x, 0));

  double previous = 1e9;
  for (int n : {3, 7, 11}) {
    const auto small = build_box(2, n, true);
    const auto large = build_box(2, n + 4, true);
    const std::vector<double> ws(small.num_edges(), 1.0), wl(large.num_edges(), 1.0);
    const double diff = std::abs(green_gradient(small, ws, {0, 0}, 0, {1, 1}, 1) -
                                 green_gradient(large, wl, {0, 0}, 0, {1, 1}, 1));
    CHECK(diff < previous);
    previous = diff;
  }
}

TEST_CASE("single edge flips") {
  auto tri = std::make_shared<const FiniteGraph>(build_triangle());
  LaplacianState st(tri, Conductances::all_soft(3, 2.0));
  CHECK(st.flip_edge(0) == doctest::Approx(std::log(15.0 / 9.0)));
  CHECK(st.flip_edge(0) == doctest::Approx(-std::log(15.0 / 9.0)));
  CHECK(std::abs(st.log_det_zero_mean() - std::log(9.0)) < 1e-10);

  auto edge = std::make_shared<const FiniteGraph>(single_edge());
  LaplacianState se(edge, Conductances::all_soft(1, 4.0));
  CHECK(se.flip_edge(0) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("flip ratio and rank-one updates track refactorization") {
  auto g = std::make_shared<const FiniteGraph>(build_box(2, 2, false));
  const double q = 10.0;
  LaplacianState st(g, Conductances::all_soft(g->num_edges(), q), 0, 64);
  Rng rng(5);
  for (int step = 0; step < 2000; ++step) {
    const EdgeId f = static_cast<EdgeId>(rng() % g->num_edges());
    const bool was_hard = st.conductances().hard[f] != 0;
    double q_minus = 0.0;
    if (!was_hard) q_minus = st.resistance(f);
    const double delta = st.flip_edge(f);
    if (!was_hard) CHECK(std::exp(delta) == doctest::Approx(1.0 + (q - 1.0) * q_minus).epsilon(1e-9));
    if (step % 250 == 0) {
      const double fresh = log_det_zero_mean(*g, st.conductances());
      CHECK(std::abs(st.log_det_zero_mean() - fresh) < 1e-9);
    }
  }
  CHECK(st.probe_residual() < 1e-9);
}

TEST_CASE("lattice edges") {
  const auto box = build_box(2, 2, true);
  const auto inner = lattice_edge(box, {0, 0}, 0);
  REQUIRE(inner.has_value());
  CHECK(box.coordinate(inner->head) == Point{1, 0});
  const auto outer = lattice_edge(box, {1, 0}, 0);
  REQUIRE(outer.has_value());
  CHECK(box.is_boundary(outer->head));
  const auto e = central_edge(box);
  CHECK(e == inner->edge);
}
