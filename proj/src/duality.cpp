#include "detcond/duality.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>

#include "detcond/mcmc.hpp"
#include "detcond/parallel.hpp"
#include "detcond/random.hpp"

namespace detcond {

DualMap make_dual_map(std::shared_ptr<const FiniteGraph> g) {
  PlanarDual pd = planar_dual(*g);
  return DualMap{std::move(g), std::make_shared<const FiniteGraph>(std::move(pd.dual.graph))};
}

Configuration dual_configuration(const DualMap& dm, const Configuration& kappa) {
  if (static_cast<int>(kappa.size()) != dm.primal->num_edges()) throw std::invalid_argument("configuration size");
  Configuration out(kappa.size());
  for (size_t e = 0; e < kappa.size(); ++e) out[e] = kappa[e] ? 0 : 1;
  return out;
}

double check_duality_pushforward(const FiniteGraph& g, double p, double q) {
  const DualMap dm = make_dual_map(std::make_shared<const FiniteGraph>(g));
  const ExactDistribution primal = enumerate(MeasureSpec::full(dm.primal, p, q));
  const ExactDistribution dual = enumerate(MeasureSpec::full(dm.dual, dual_parameter(p, q), q));
  const std::uint32_t all = static_cast<std::uint32_t>(primal.size() - 1);
  double tv = 0.0;
  for (std::uint32_t b = 0; b < primal.size(); ++b) tv += std::abs(primal.probability(b) - dual.probability(all ^ b));
  return 0.5 * tv;
}

ContourFootprint contour_footprint(const FiniteGraph& box, const Contour& c) {
  auto edge_of = [&](const Bond& b) {
    const auto u = box.find_vertex(Point{b[0][0], b[0][1]});
    const auto v = box.find_vertex(Point{b[1][0], b[1][1]});
    if (!u || !v) throw GraphError("contour leaves the box");
    const auto e = box.find_edge(*u, *v);
    if (!e) throw GraphError("contour crosses a bond missing from the box");
    return *e;
  };
  std::set<EdgeId> soft, hard;
  for (const Bond& b : c.crossed()) soft.insert(edge_of(b));
  for (const DualSite& z : c.distinct_vertices())
    for (const Bond& b : plaquette_faces(z))
      if (c.interior_bond(b)) hard.insert(edge_of(b));
  return ContourFootprint{{soft.begin(), soft.end()}, {hard.begin(), hard.end()}};
}

bool is_q_contour(const ContourFootprint& fp, const Configuration& kappa) {
  for (EdgeId e : fp.soft)
    if (kappa[e]) return false;
  for (EdgeId e : fp.hard)
    if (!kappa[e]) return false;
  return true;
}

bool is_q_contour(const FiniteGraph& box, const Contour& c, const Configuration& kappa) {
  return is_q_contour(contour_footprint(box, c), kappa);
}

double peierls_bound(int length, double q) {
  return std::exp(length * (std::log(4.0) - std::log(q) / 8.0) + 0.5 * std::log(q));
}

double contour_sum_bound(const std::map<int, int>& counts_by_length, double q) {
  double s = 0.0;
  for (const auto& [len, count] : counts_by_length) s += count * peierls_bound(len, q);
  return s;
}

double product_frequency(const ContourFootprint& fp, double p) {
  return std::pow(p, static_cast<double>(fp.hard.size())) * std::pow(1.0 - p, static_cast<double>(fp.soft.size()));
}

nlohmann::json ContourReport::classes_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : classes)
    arr.push_back({{"length", c.length},
                   {"count", c.count},
                   {"frequency", c.frequency},
                   {"max_frequency", c.max_frequency},
                   {"bound", c.bound},
                   {"vacuous", c.vacuous}});
  return arr;
}

nlohmann::json ContourReport::to_json() const {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& c : contours) {
    nlohmann::json path = nlohmann::json::array();
    for (const auto& z : c.vertices) path.push_back({z.x, z.y});
    per.push_back({{"length", c.length},
                   {"dual_vertices", path},
                   {"frequency", c.frequency},
                   {"stderr", c.stderr},
                   {"bound", c.bound},
                   {"exceeds", c.exceeds}});
  }
  return {{"n", n},
          {"p", p},
          {"q", q},
          {"max_len", max_len},
          {"sweeps", sweeps},
          {"seed", seed},
          {"classes", classes_json()},
          {"contours", per},
          {"explicit_sum_bound", explicit_sum_bound},
          {"any_exceeds", any_exceeds}};
}

ContourReport estimate_contour_frequency(int n, double p, double q, int max_len, long sweeps, long burnin,
                                         std::uint64_t seed) {
  auto box = std::make_shared<const FiniteGraph>(build_box(2, n, false));
  const EdgeId e = central_edge(*box);
  const ContourEnumeration en = enumerate_contours_around(*box, e, max_len);

  std::vector<ContourFootprint> prints;
  for (const Contour& c : en.contours) prints.push_back(contour_footprint(*box, c));

  ChainSettings s;
  s.seed = seed;
  s.burnin = burnin;
  s.observed_edge = e;
  Chain chain(MeasureSpec::full(box, p, q, Boundary::free), s);
  std::vector<long> hits(prints.size(), 0);
  long samples = 0;
  for (long i = 0; i < burnin + sweeps; ++i) {
    chain.sweep();
    if (chain.sweeps_done() <= burnin) continue;
    ++samples;
    for (size_t k = 0; k < prints.size(); ++k)
      if (is_q_contour(prints[k], chain.kappa())) ++hits[k];
  }
  const double tau = chain.summary().tau_int;

  ContourReport rep;
  rep.n = n;
  rep.p = p;
  rep.q = q;
  rep.max_len = max_len;
  rep.sweeps = sweeps;
  rep.seed = seed;
  std::map<int, int> counts;
  std::map<int, ContourLengthClass> classes;
  for (size_t k = 0; k < prints.size(); ++k) {
    ContourFrequency cf;
    cf.length = en.contours[k].length();
    cf.vertices = en.contours[k].dual_vertices();
    cf.frequency = samples ? static_cast<double>(hits[k]) / samples : 0.0;
    cf.stderr = samples ? std::sqrt(cf.frequency * (1.0 - cf.frequency) * 2.0 * tau / samples) : 0.0;
    cf.bound = peierls_bound(cf.length, q);
    cf.exceeds = cf.bound < 1.0 && cf.frequency > cf.bound + 3.0 * cf.stderr;
    rep.any_exceeds = rep.any_exceeds || cf.exceeds;
    ++counts[cf.length];
    auto& cl = classes[cf.length];
    cl.length = cf.length;
    ++cl.count;
    cl.frequency += cf.frequency;
    cl.max_frequency = std::max(cl.max_frequency, cf.frequency);
    cl.bound = cf.bound;
    cl.vacuous = cf.bound >= 1.0;
    rep.contours.push_back(std::move(cf));
  }
  for (auto& [len, cl] : classes) {
    cl.frequency /= cl.count;
    rep.classes.push_back(cl);
  }
  rep.explicit_sum_bound = contour_sum_bound(counts, q);
  return rep;
}

nlohmann::json GapReport::to_json() const {
  nlohmann::json r = nlohmann::json::array();
  for (const auto& row : rows)
    r.push_back({{"n", row.n},
                 {"p", row.p},
                 {"q", row.q},
                 {"bc", to_string(row.bc)},
                 {"edge", row.edge},
                 {"estimate", row.estimate},
                 {"stderr", row.stderr},
                 {"sweeps", row.sweeps},
                 {"seed", row.seed}});
  return {{"rows", r},
          {"free_mean", free_mean},
          {"free_stderr", free_stderr},
          {"wired_mean", wired_mean},
          {"wired_stderr", wired_stderr},
          {"gap", gap},
          {"gap_stderr", gap_stderr},
          {"sum", sum}};
}

GapReport free_wired_gap(int n, double p, double q, long sweeps, long burnin,
                         const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("free/wired gap needs at least one seed");
  auto free_box = std::make_shared<const FiniteGraph>(build_box(2, n, false));
  auto wired_box = std::make_shared<const FiniteGraph>(build_box(2, n, true));
  const EdgeId ef = central_edge(*free_box);
  const EdgeId ew = central_edge(*wired_box);

  GapReport rep;
  rep.rows.resize(2 * seeds.size());
  parallel_for(rep.rows.size(), [&](std::size_t i) {
    const bool wired = i % 2 == 1;
    const std::uint64_t seed = seeds[i / 2];
    ChainSettings s;
    s.seed = derive_seed(seed, wired ? 1 : 0);
    s.burnin = burnin;
    s.observed_edge = wired ? ew : ef;
    Chain chain(MeasureSpec::full(wired ? wired_box : free_box, p, q, wired ? Boundary::wired : Boundary::free), s);
    chain.run(burnin + sweeps);
    const ChainSummary sum = chain.summary();
    GapRow& row = rep.rows[i];
    row.n = n;
    row.p = p;
    row.q = q;
    row.bc = wired ? Boundary::wired : Boundary::free;
    row.edge = free_box->source_edge(ef);
    row.estimate = sum.marginal;
    row.stderr = sum.marginal_stderr;
    row.sweeps = sweeps;
    row.seed = seed;
  });

  auto combine = [&](Boundary bc, double& m, double& se) {
    std::vector<const GapRow*> r;
    for (const auto& row : rep.rows)
      if (row.bc == bc) r.push_back(&row);
    m = 0.0;
    for (const auto* x : r) m += x->estimate;
    m /= static_cast<double>(r.size());
    if (r.size() >= 2) {
      double v = 0.0;
      for (const auto* x : r) v += (x->estimate - m) * (x->estimate - m);
      se = std::sqrt(v / static_cast<double>(r.size() - 1) / static_cast<double>(r.size()));
    } else {
      se = r.front()->stderr;
    }
  };
  combine(Boundary::free, rep.free_mean, rep.free_stderr);
  combine(Boundary::wired, rep.wired_mean, rep.wired_stderr);
  rep.gap = rep.wired_mean - rep.free_mean;
  rep.gap_stderr = std::sqrt(rep.free_stderr * rep.free_stderr + rep.wired_stderr * rep.wired_stderr);
  rep.sum = rep.free_mean + rep.wired_mean;
  return rep;
}

void write_gap_csv(std::ostream& out, const std::vector<GapRow>& rows) {
  out << "n,p,q,bc,edge,estimate,stderr,sweeps,seed\n" << std::setprecision(17);
  for (const auto& r : rows)
    out << r.n << ',' << r.p << ',' << r.q << ',' << to_string(r.bc) << ',' << r.edge << ',' << r.estimate << ','
        << r.stderr << ',' << r.sweeps << ',' << r.seed << '\n';
}

}  // namespace detcond
