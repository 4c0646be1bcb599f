#include <doctest.h>

#include <cmath>
#include <memory>

#include "detcond/mcmc.hpp"
#include "detcond/model.hpp"

using namespace detcond;

namespace {

std::shared_ptr<const FiniteGraph> shared(FiniteGraph g) { return std::make_shared<const FiniteGraph>(std::move(g)); }

}  // namespace

TEST_CASE("autocorrelation of iid noise") {
  Rng rng(3);
  std::vector<double> x(20000);
  for (double& v : x) v = uniform01(rng);
  CHECK(integrated_autocorrelation(x) == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("q = 1 chain is Bernoulli") {
  const auto g = shared(build_grid(2, 3));
  ChainSettings s;
  s.seed = 4;
  s.burnin = 10;
  s.observed_edge = 0;
  Chain c(MeasureSpec::full(g, 0.3, 1.0), s);
  for (EdgeId f = 0; f < g->num_edges(); ++f) CHECK(c.hard_probability(f) == doctest::Approx(0.3));
  c.run(40000);
  const auto sum = c.summary();
  CHECK(std::abs(sum.marginal - 0.3) < 3.0 * sum.marginal_stderr);
  CHECK(std::abs(sum.h_density - 0.3) < 3.0 * sum.h_stderr);
}

TEST_CASE("edge marginal matches enumeration") {
  const auto g = shared(build_grid(2, 2));
  const auto spec = MeasureSpec::full(g, 0.5, 2.0);
  const double exact = enumerate(spec).marginal(0);
  ChainSettings s;
  s.seed = 99;
  s.burnin = 100;
  s.observed_edge = 0;
  Chain c(spec, s);
  c.run(1000000);
  const auto sum = c.summary();
  CHECK(sum.samples == 1000000 - 100);
  CHECK(std::abs(sum.marginal - exact) < 3.0 * sum.marginal_stderr);
}

TEST_CASE("p near one absorbs into all hard") {
  const auto g = shared(build_grid(2, 3));
  ChainSettings s;
  s.burnin = 0;
  int absorbed = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    s.seed = seed;
    Chain c(MeasureSpec::full(g, 1.0 - 1e-12, 100.0), s);
    c.sweep();
    absorbed += c.hard_count() == g->num_edges();
  }
  CHECK(absorbed == 200);
}

TEST_CASE("checkpoint restore continues identically") {
  const auto g = shared(build_box(2, 2, false));
  const auto spec = MeasureSpec::full(g, 0.55, 7.0);
  ChainSettings s;
  s.seed = 17;
  s.burnin = 5;
  s.observed_edge = central_edge(*g);
  Chain a(spec, s);
  a.run(37);
  auto blob = a.checkpoint();
  Chain b = Chain::restore(spec, blob);
  for (int i = 0; i < 1000; ++i) {
    a.sweep();
    b.sweep();
    REQUIRE(a.kappa() == b.kappa());
  }
  CHECK(a.edge_series() == b.edge_series());
  CHECK(a.laplacian().log_det_pinned() == b.laplacian().log_det_pinned());
  CHECK(a.summary().marginal == b.summary().marginal);
}

TEST_CASE("checkpoint at sweep zero") {
  const auto g = shared(build_box(2, 1, true));
  const auto spec = MeasureSpec::full(g, 0.5, 3.0, Boundary::wired);
  Chain a(spec, ChainSettings{});
  const auto start = a.kappa();
  Chain b = Chain::restore(spec, a.checkpoint());
  CHECK(b.sweeps_done() == 0);
  CHECK(b.kappa() == start);
  CHECK(start == Configuration(4, 1));
}

TEST_CASE("corrupt or foreign checkpoints") {
  const auto g = shared(build_grid(2, 3));
  const auto spec = MeasureSpec::full(g, 0.5, 3.0);
  Chain a(spec, ChainSettings{});
  a.run(10);
  auto blob = a.checkpoint();

  auto flipped = blob;
  flipped[flipped.size() / 2] ^= 0x20;
  CHECK_THROWS_AS(Chain::restore(spec, flipped), CheckpointError);

  auto truncated = blob;
  truncated.resize(blob.size() - 9);
  CHECK_THROWS_AS(Chain::restore(spec, truncated), CheckpointError);

  CHECK_THROWS_AS(Chain::restore(MeasureSpec::full(shared(build_grid(3, 2)), 0.5, 3.0), blob), CheckpointError);
  CHECK_THROWS_AS(Chain::restore(MeasureSpec::full(g, 0.5, 4.0), blob), CheckpointError);
  CHECK_THROWS_AS(Chain::load(spec, "/nonexistent/chain.ckpt"), CheckpointError);
}

TEST_CASE("identical coupled chains agree forever") {
  const auto g = shared(build_grid(2, 2));
  const auto spec = MeasureSpec::full(g, 0.4, 5.0);
  CouplingOptions o;
  o.sweeps = 2000;
  o.lower_start = StartState::all_soft;
  o.upper_start = StartState::all_soft;
  const auto r = run_coupled(spec, spec, o);
  CHECK(r.violations == 0);
  CHECK(r.agreeing_sweeps == 2000);
}

TEST_CASE("p-ordered coupling") {
  const auto g = shared(build_grid(2, 2));
  CouplingOptions o;
  o.sweeps = 100000;
  o.seed = 8;
  o.observed_key = 0;
  const auto r = run_coupled(MeasureSpec::full(g, 0.3, 2.0), MeasureSpec::full(g, 0.5, 2.0), o);
  CHECK(r.violations == 0);
  CHECK(r.lower.marginal <= r.upper.marginal);
}

TEST_CASE("free-wired coupling") {
  const auto fr = shared(build_box(2, 2, false));
  const auto wi = shared(build_box(2, 2, true));
  const double p = self_dual_point(10.0);
  CouplingOptions o;
  o.sweeps = 10000;
  o.seed = 21;
  o.observed_key = central_edge(*fr);
  const auto r = run_coupled(MeasureSpec::full(fr, p, 10.0), MeasureSpec::full(wi, p, 10.0, Boundary::wired), o);
  CHECK(r.violations == 0);
  CHECK(r.lower.marginal <= r.upper.marginal);
}
