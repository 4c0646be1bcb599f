#include <doctest.h>

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "detcond/model.hpp"
#include "detcond/spanning_tree.hpp"

using namespace detcond;

namespace {

std::shared_ptr<const FiniteGraph> shared(FiniteGraph g) { return std::make_shared<const FiniteGraph>(std::move(g)); }

// Direct product weight p^h (1-p)^s / sqrt(|V| sum_t w).
double brute_weight(const FiniteGraph& g, const Configuration& k, double p, double q) {
  std::vector<double> w(g.num_edges());
  int h = 0;
  for (int e = 0; e < g.num_edges(); ++e) {
    w[e] = k[e] ? q : 1.0;
    h += k[e];
  }
  return std::pow(p, h) * std::pow(1 - p, g.num_edges() - h) / std::sqrt(kirchhoff_sum(g, w));
}

}  // namespace

TEST_CASE("enumeration matches brute-force weights") {
  for (auto g : {shared(build_triangle()), shared(build_grid(2, 3)), shared(build_box(2, 1, true))}) {
    for (double q : {1.0, 3.0, 50.0}) {
      const auto spec = MeasureSpec::full(g, 0.35, q);
      const auto dist = enumerate(spec);
      double z = 0.0, total = 0.0;
      for (std::uint32_t b = 0; b < dist.size(); ++b) z += brute_weight(*g, spec.join(b), 0.35, q);
      for (std::uint32_t b = 0; b < dist.size(); ++b) {
        CHECK(dist.probability(b) == doctest::Approx(brute_weight(*g, spec.join(b), 0.35, q) / z).epsilon(1e-12));
        total += dist.probability(b);
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("single edge and triangle examples") {
  const auto edge = shared(FiniteGraph(2, {{0, 1}}));
  CHECK(enumerate(MeasureSpec::full(edge, 0.5, 4.0)).marginal(0) == doctest::Approx(1.0 / 3.0));

  const auto tri = shared(build_triangle());
  const auto spec = MeasureSpec::full(tri, 0.5, 2.0);
  const double lw = log_weight(spec, {1, 0, 0});
  CHECK(lw == doctest::Approx(3 * std::log(0.5) - 0.5 * std::log(15.0)));
  CHECK(conditional_hard(spec, {0, 0, 0}, 0) == doctest::Approx(1.0 / (1.0 + std::sqrt(5.0 / 3.0))));
  CHECK(conditional_hard(spec, {0, 0, 0}, 0) == doctest::Approx(0.43649).epsilon(1e-5));

  const auto path = shared(build_path(3));
  CHECK(conditional_hard(MeasureSpec::full(path, 0.5, 9.0), {0, 1}, 0) == doctest::Approx(0.25));
  CHECK(hard_probability(0.5, 4.0, 1.0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("q = 1 is Bernoulli") {
  const auto g = shared(build_grid(2, 3));
  const auto spec = MeasureSpec::full(g, 0.3, 1.0);
  const auto dist = enumerate(spec);
  for (int i = 0; i < dist.num_active(); ++i) CHECK(dist.marginal(i) == doctest::Approx(0.3).epsilon(1e-13));
  const Configuration a{1, 0, 0, 1, 0, 0, 1}, b{0, 0, 1, 1, 1, 1, 0};
  CHECK(log_weight(spec, a) - log_weight(spec, b) ==
        doctest::Approx(3 * std::log(0.3) + 4 * std::log(0.7) - 4 * std::log(0.3) - 3 * std::log(0.7)));
  Configuration k(g->num_edges(), 0);
  for (EdgeId f = 0; f < g->num_edges(); ++f) CHECK(conditional_hard(spec, k, f) == doctest::Approx(0.3));
}

TEST_CASE("degenerate p") {
  const auto g = shared(build_cycle(4));
  const auto zero = enumerate(MeasureSpec::full(g, 0.0, 5.0));
  CHECK(zero.probability(0) == doctest::Approx(1.0));
  const auto one = enumerate(MeasureSpec::full(g, 1.0, 5.0));
  CHECK(one.probability(15) == doctest::Approx(1.0));
  CHECK_THROWS(enumerate(MeasureSpec::full(g, 1.5, 5.0)));
  CHECK_THROWS(enumerate(MeasureSpec::full(g, 0.5, 0.5)));
}

TEST_CASE("conditionals agree with enumeration") {
  const auto g = shared(build_grid(2, 3));
  const auto spec = MeasureSpec::full(g, 0.6, 16.0);
  const auto dist = enumerate(spec);
  for (std::uint32_t b = 0; b < dist.size(); b += 7)
    for (int f = 0; f < g->num_edges(); ++f) {
      const std::uint32_t soft = b & ~(1u << f), hard = b | (1u << f);
      const double expect = dist.probability(hard) / (dist.probability(hard) + dist.probability(soft));
      CHECK(conditional_hard(spec, spec.join(b), f) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("enumeration cap") {
  CHECK_THROWS_AS(enumerate(MeasureSpec::full(shared(build_box(2, 2, false)), 0.5, 2.0)), SizeCapError);
}

TEST_CASE("specification is proper and consistent") {
  const auto tri = shared(build_triangle());
  const Configuration lambda{1, 0, 1};
  const auto outer = MeasureSpec::conditioned(tri, 0.4, 3.0, {0, 1}, lambda);
  CHECK(specification_kernel(outer, [&](const Configuration& k) { return k[2] == lambda[2]; }) ==
        doctest::Approx(1.0));

  double worst = 0.0;
  for (std::uint32_t event = 0; event < 256; ++event) {
    auto in_event = [&](const Configuration& k) { return (event >> (k[0] | k[1] << 1 | k[2] << 2) & 1u) != 0; };
    for (std::uint32_t lb = 0; lb < 8; ++lb) {
      const Configuration lam{static_cast<std::uint8_t>(lb & 1), static_cast<std::uint8_t>(lb >> 1 & 1),
                              static_cast<std::uint8_t>(lb >> 2 & 1)};
      const auto big = MeasureSpec::conditioned(tri, 0.4, 3.0, {0, 1, 2}, lam);
      const double direct = specification_kernel(big, in_event);
      const auto dist = enumerate(big);
      double composed = 0.0;
      for (std::uint32_t b = 0; b < dist.size(); ++b) {
        const auto inner = MeasureSpec::conditioned(tri, 0.4, 3.0, {1}, big.join(b));
        composed += dist.probability(b) * specification_kernel(inner, in_event);
      }
      worst = std::max(worst, std::abs(direct - composed));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("domain Markov property") {
  const auto g = shared(build_grid(2, 2));
  const auto full = enumerate(MeasureSpec::full(g, 0.45, 6.0));
  const std::vector<EdgeId> inner{1, 2};
  for (std::uint32_t lb = 0; lb < 16; ++lb) {
    Configuration lam(4);
    for (int e = 0; e < 4; ++e) lam[e] = lb >> e & 1u;
    const auto cond = enumerate(MeasureSpec::conditioned(g, 0.45, 6.0, inner, lam));
    double mass = 0.0;
    std::vector<double> joint(4, 0.0);
    for (std::uint32_t b = 0; b < 16; ++b) {
      if ((b & 0b1001u) != (lb & 0b1001u)) continue;
      mass += full.probability(b);
      joint[(b >> 1 & 1u) | (b >> 2 & 1u) << 1] += full.probability(b);
    }
    for (std::uint32_t w = 0; w < 4; ++w) CHECK(cond.probability(w) == doctest::Approx(joint[w] / mass).epsilon(1e-12));
  }
}

TEST_CASE("dual parameter") {
  CHECK(dual_parameter(0.5, 4.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(dual_parameter(0.3, 1.0) == doctest::Approx(0.7).epsilon(1e-15));
  for (double q : {2.0, 16.0})
    for (int i = 1; i <= 9; ++i) CHECK(std::abs(dual_parameter(dual_parameter(i / 10.0, q), q) - i / 10.0) <= 1e-14);
  CHECK(self_dual_point(16.0) == 2.0 / 3.0);
  CHECK(self_dual_point(1.0) == 0.5);
  const double psd = self_dual_point(1e6);
  CHECK(std::abs(dual_parameter(psd, 1e6) - psd) <= 1e-14);
}

TEST_CASE("golden enumeration csv") {
  const auto dist = enumerate(MeasureSpec::full(shared(build_triangle()), 0.5, 2.0));
  std::ostringstream out;
  dist.write_csv(out);
  std::ifstream in(std::string(DETCOND_GOLDEN_DIR) + "/triangle_p0.5_q2.csv");
  REQUIRE(in.good());
  std::stringstream expect;
  expect << in.rdbuf();
  CHECK(out.str() == expect.str());
  CHECK(dist.size() == 8);
}
