#include <doctest.h>

#include <cmath>
#include <sstream>

#include "detcond/dobrushin.hpp"
#include "detcond/spanning_tree.hpp"

using namespace detcond;

TEST_CASE("vanishing rows") {
  const auto box = build_box(2, 2, true);
  const EdgeId f = central_edge(box);
  for (auto probes : {ProbeStrategy::extremal, ProbeStrategy::random}) {
    const auto flat = dobrushin_bound(box, 0.5, 1.0, f, probes, 5, 2);
    CHECK(flat.row_sum == 0.0);
    for (double p : {0.0, 1.0}) {
      const auto r = dobrushin_bound(box, p, 3.0, f, probes, 5, 2);
      CHECK(r.row_sum == 0.0);
      for (const auto& e : r.entries) CHECK(e.value == 0.0);
    }
  }
}

TEST_CASE("entry from currents") {
  const auto box = build_box(2, 2, false);
  const EdgeId f = central_edge(box);
  const auto rep = dobrushin_bound(box, 0.5, 2.0, f, ProbeStrategy::extremal);
  const std::vector<double> soft(box.num_edges(), 1.0), hard(box.num_edges(), 2.0);
  int checked = 0;
  for (const auto& e : rep.entries) {
    CHECK(e.edge != f);
    CHECK(e.value >= 0.0);
    double best = 0.0;
    for (const auto* w : {&soft, &hard}) {
      // Unit conductances on f and g: I_f(g) I_g(f) = kappa_f kappa_g (b_g^T G b_f)^2.
      const double gg = green_gradient(box, *w, {0, 0}, 0, e.bond.tail, e.bond.direction);
      best = std::max(best, (*w)[0] * (*w)[0] * gg * gg);
    }
    CHECK(e.value == doctest::Approx(0.25 * best).epsilon(1e-10));
    ++checked;
  }
  CHECK(checked == box.num_edges() - 1);
  const auto near = rep.entry_at({1, 0}, 0);
  REQUIRE(near.has_value());
  CHECK(*near > 0.0);
  CHECK_FALSE(rep.entry_at({9, 9}, 0).has_value());
  CHECK_FALSE(rep.certified);
}

TEST_CASE("exhaustive probes certify") {
  const auto box = build_box(2, 1, false);
  const auto all = dobrushin_bound(box, 0.5, 4.0, central_edge(box), ProbeStrategy::all);
  CHECK(all.certified);
  CHECK(all.configurations == 4096);
  const auto ext = dobrushin_bound(box, 0.5, 4.0, central_edge(box), ProbeStrategy::extremal);
  CHECK(ext.row_sum <= all.row_sum + 1e-15);
  CHECK_THROWS_AS(dobrushin_bound(build_box(2, 2, false), 0.5, 4.0, 0, ProbeStrategy::all), SizeCapError);
}

TEST_CASE("row sums grow with q") {
  const auto box = build_box(2, 3, true);
  const EdgeId f = central_edge(box);
  double previous = 0.0;
  for (double q : {1.1, 2.0, 10.0}) {
    const double s = dobrushin_bound(box, 0.5, q, f, ProbeStrategy::extremal).row_sum;
    CHECK(s > previous);
    previous = s;
  }
}

TEST_CASE("homogeneous row sum") {
  // Sum over g of (b_g^T G b_f)^2 equals R_eff(f) = 1/2 on Z^2, minus the
  // diagonal 1/4, so C = (1/4)(1/2 - 1/4) = 1/16 for p = 1/2, q = 2 at all-soft.
  const auto box = build_box(2, 12, true);
  const auto rep = dobrushin_bound(box, 0.5, 2.0, central_edge(box), ProbeStrategy::extremal);
  CHECK(rep.row_sum == doctest::Approx(1.0 / 16).epsilon(0.01));
}

TEST_CASE("decay fit") {
  const auto soft = green_decay_fit(2, 40, 2.0, KappaStrategy::all_soft, 2, 20);
  CHECK(soft.exponent == doctest::Approx(2.0).epsilon(0.075));
  const auto hard = green_decay_fit(2, 40, 2.0, KappaStrategy::all_hard, 2, 20);
  CHECK(hard.exponent == doctest::Approx(soft.exponent).epsilon(1e-9));
  CHECK(soft.rows.size() == 19);
  std::ostringstream out;
  write_decay_csv(out, soft);
  CHECK(out.str().rfind("r,mean_abs_grad2_G,fit_exponent\n", 0) == 0);
  CHECK_THROWS_AS(green_decay_fit(2, 40, 2.0, KappaStrategy::all_soft, 2, 10), std::invalid_argument);
  CHECK_THROWS_AS(green_decay_fit(2, 20, 2.0, KappaStrategy::all_soft, 2, 20), std::invalid_argument);
  CHECK_THROWS_AS(green_decay_fit(5, 40, 2.0, KappaStrategy::all_soft, 2, 20), std::invalid_argument);
}

TEST_CASE("strategy names") {
  for (auto s : {ProbeStrategy::all, ProbeStrategy::extremal, ProbeStrategy::random})
    CHECK(parse_probe_strategy(to_string(s)) == s);
  for (auto s : {KappaStrategy::all_soft, KappaStrategy::all_hard, KappaStrategy::random})
    CHECK(parse_kappa_strategy(to_string(s)) == s);
  CHECK_THROWS(parse_probe_strategy("most"));
}
