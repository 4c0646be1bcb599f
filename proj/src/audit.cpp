#include "detcond/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "detcond/mcmc.hpp"
#include "detcond/random.hpp"
#include "detcond/spanning_tree.hpp"

namespace detcond {

namespace {

std::string bits_string(std::uint32_t b, int k) {
  std::string s;
  for (int i = 0; i < k; ++i) s.push_back((b >> i & 1u) ? '1' : '0');
  return s;
}

void check_fkg_pair(AuditReport& rep, const std::vector<double>& lp, std::uint32_t a, std::uint32_t b, int k) {
  const double margin = lp[a | b] + lp[a & b] - lp[a] - lp[b];
  std::ostringstream where;
  where << "a=" << bits_string(a, k) << " b=" << bits_string(b, k);
  rep.check(margin, where.str());
}

void require_positive(const std::vector<double>& lp, AuditReport& rep, const char* which) {
  for (double x : lp)
    if (!std::isfinite(x)) {
      rep.violations.push_back(std::string(which) + " is not strictly positive");
      return;
    }
}

}  // namespace

void AuditReport::check(double margin, const std::string& where) {
  if (cases == 0 || margin < worst_margin) worst_margin = margin;
  ++cases;
  if (!(margin >= -kAuditSlack)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << where << " margin=" << margin;
    violations.push_back(msg.str());
  }
}

nlohmann::json AuditReport::to_json() const {
  nlohmann::json j;
  j["id"] = id;
  j["instance"] = instance;
  j["cases"] = cases;
  j["worst_margin"] = worst_margin;
  j["violations"] = violations;
  if (seed) j["seed"] = *seed;
  if (!details.empty()) j["details"] = details;
  return j;
}

std::vector<double> log_probabilities(const ExactDistribution& d) {
  std::vector<double> lp(d.size());
  for (std::uint32_t b = 0; b < d.size(); ++b) lp[b] = d.log_weight(b) - d.log_normalization();
  return lp;
}

AuditReport audit_two_edge_determinant(const FiniteGraph& g, double q, const std::string& instance) {
  AuditReport rep;
  rep.id = "two-edge";
  rep.instance = instance;
  const int m = g.num_edges();
  if (m > kMaxTreeEnumerationEdges) throw SizeCapError("two-edge audit needs at most 16 edges");
  const auto trees = spanning_trees(g);
  auto log_det = [&](std::uint32_t hard_bits) {
    double s = 0.0;
    for (std::uint32_t t : trees) s += std::pow(q, __builtin_popcount(t & hard_bits));
    return std::log(s);
  };
  for (int f = 0; f < m; ++f)
    for (int h = f + 1; h < m; ++h) {
      const std::uint32_t fb = 1u << f, hb = 1u << h;
      for (std::uint32_t rest = 0; rest < (1u << m); ++rest) {
        if (rest & (fb | hb)) continue;
        const double pp = log_det(rest | fb | hb), mm = log_det(rest);
        const double pm = log_det(rest | fb), mp = log_det(rest | hb);
        std::ostringstream where;
        where << "f=" << f << " g=" << h << " rest=" << bits_string(rest, m);
        rep.check(pm + mp - pp - mm, where.str());
      }
    }
  return rep;
}

AuditReport audit_fkg_lattice(const MeasureSpec& spec, const std::string& instance, std::uint64_t seed,
                              long random_pairs, int exhaustive_limit) {
  AuditReport rep;
  rep.id = "fkg";
  rep.instance = instance;
  const ExactDistribution d = enumerate(spec);
  const auto lp = log_probabilities(d);
  require_positive(lp, rep, "measure");
  if (!rep.ok()) return rep;
  const int k = spec.num_active();
  if (k <= exhaustive_limit) {
    for (std::uint32_t a = 0; a < d.size(); ++a)
      for (std::uint32_t b = 0; b < d.size(); ++b) check_fkg_pair(rep, lp, a, b, k);
    rep.details["mode"] = "exhaustive";
    return rep;
  }
  Rng rng(seed);
  const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
  for (long i = 0; i < random_pairs; ++i) {
    const auto a = static_cast<std::uint32_t>(rng() & mask);
    const auto b = static_cast<std::uint32_t>(rng() & mask);
    check_fkg_pair(rep, lp, a, b, k);
  }
  rep.seed = seed;
  rep.details["mode"] = "random";
  return rep;
}

AuditReport audit_fkg_lattice_sampled(const MeasureSpec& spec, const std::string& instance, std::uint64_t seed,
                                      long random_pairs) {
  AuditReport rep = audit_fkg_lattice(spec, instance, seed, random_pairs, 6);
  if (rep.details.value("mode", "") == "exhaustive") {
    const AuditReport r2 = audit_fkg_lattice(spec, instance, seed, random_pairs, -1);
    rep.cases += r2.cases;
    rep.worst_margin = std::min(rep.worst_margin, r2.worst_margin);
    rep.violations.insert(rep.violations.end(), r2.violations.begin(), r2.violations.end());
    rep.seed = seed;
    rep.details["mode"] = "exhaustive+random";
  }
  return rep;
}

AuditReport audit_holley_pair(const std::vector<double>& log_mu1, const std::vector<double>& log_mu2, int k,
                              const std::string& instance) {
  AuditReport rep;
  rep.id = "holley";
  rep.instance = instance;
  const std::size_t n = std::size_t{1} << k;
  if (log_mu1.size() != n || log_mu2.size() != n) throw std::invalid_argument("Holley audit: size mismatch");
  require_positive(log_mu1, rep, "lower measure");
  require_positive(log_mu2, rep, "upper measure");
  if (!rep.ok()) return rep;

  long single = 0, pair = 0;
  for (std::uint32_t w = 0; w < n; ++w)
    for (int f = 0; f < k; ++f) {
      const std::uint32_t fb = 1u << f;
      if (w & fb) continue;
      // mu2(w_f^+) mu1(w_f^-) >= mu1(w_f^+) mu2(w_f^-)
      std::ostringstream where;
      where << "single f=" << f << " w=" << bits_string(w, k);
      rep.check(log_mu2[w | fb] + log_mu1[w] - log_mu1[w | fb] - log_mu2[w], where.str());
      ++single;
      for (int g = 0; g < k; ++g) {
        const std::uint32_t gb = 1u << g;
        if (g == f || (w & gb)) continue;
        // mu2(w^{++}) mu1(w^{--}) >= mu1(w^{+-}) mu2(w^{-+})
        std::ostringstream where2;
        where2 << "pair f=" << f << " g=" << g << " w=" << bits_string(w, k);
        rep.check(log_mu2[w | fb | gb] + log_mu1[w] - log_mu1[w | fb] - log_mu2[w | gb], where2.str());
        ++pair;
      }
    }

  nlohmann::json singletons = nlohmann::json::array();
  for (int e = 0; e < k; ++e) {
    double m1 = 0.0, m2 = 0.0;
    for (std::uint32_t w = 0; w < n; ++w)
      if (w >> e & 1u) {
        m1 += std::exp(log_mu1[w]);
        m2 += std::exp(log_mu2[w]);
      }
    singletons.push_back({{"bit", e}, {"lower", m1}, {"upper", m2}});
    if (m2 - m1 < -kAuditSlack) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "singleton bit=" << e << " lower=" << m1 << " upper=" << m2;
      rep.violations.push_back(msg.str());
    }
  }
  rep.details["single_edge_cases"] = single;
  rep.details["two_edge_cases"] = pair;
  rep.details["singletons"] = singletons;
  return rep;
}

AuditReport audit_holley_pair(const MeasureSpec& lower, const MeasureSpec& upper, const std::string& instance) {
  if (lower.num_active() != upper.num_active()) throw std::invalid_argument("Holley audit: active sets differ in size");
  return audit_holley_pair(log_probabilities(enumerate(lower)), log_probabilities(enumerate(upper)),
                           lower.num_active(), instance);
}

AuditReport audit_free_wired(int n, double p, double q) {
  auto free_box = std::make_shared<const FiniteGraph>(build_box(2, n, false));
  auto wired_box = std::make_shared<const FiniteGraph>(build_box(2, n, true));
  if (free_box->num_edges() > kMaxEnumerationEdges) throw SizeCapError("free/wired Holley audit needs at most 20 edges");
  const ExactDistribution wired = enumerate(MeasureSpec::full(wired_box, p, q, Boundary::wired));
  const ExactDistribution free_d = enumerate(MeasureSpec::full(free_box, p, q, Boundary::free));
  const auto& wa = wired.spec().active;
  std::vector<int> indices;
  for (EdgeId e : wa) {
    const EdgeId src = wired_box->source_edge(e);
    const auto& fa = free_d.spec().active;
    const auto it = std::find(fa.begin(), fa.end(), src);
    if (it == fa.end()) throw std::logic_error("wired edge without a free counterpart");
    indices.push_back(static_cast<int>(it - fa.begin()));
  }
  std::vector<double> lower;
  for (double x : free_d.marginalize(indices)) lower.push_back(std::log(x));
  AuditReport rep = audit_holley_pair(lower, log_probabilities(wired), static_cast<int>(wa.size()),
                                      "free vs wired, Lambda_" + std::to_string(n));
  rep.id = "holley-free-wired";
  return rep;
}

AuditReport audit_subgraph_contraction(const FiniteGraph& g, const std::vector<EdgeId>& subgraph_edges,
                                       const std::vector<EdgeId>& contracted, EdgeId f, double q,
                                       const std::string& instance) {
  AuditReport rep;
  rep.id = "subgraph-contraction";
  rep.instance = instance;
  const int m = g.num_edges();
  if (m > kMaxTreeEnumerationEdges) throw SizeCapError("subgraph/contraction audit needs at most 16 edges");
  if (std::find(subgraph_edges.begin(), subgraph_edges.end(), f) == subgraph_edges.end())
    throw std::invalid_argument("edge f must belong to the subgraph");
  if (std::find(contracted.begin(), contracted.end(), f) != contracted.end())
    throw std::invalid_argument("edge f must not be contracted");

  const Contraction sub = edge_subgraph(g, subgraph_edges);
  const Contraction quo = contract_edges(g, contracted);
  const auto trees_g = spanning_trees(g);
  const auto trees_s = spanning_trees(sub.graph);
  const auto trees_q = spanning_trees(quo.graph);

  // ln sum_t q^{|t & hard|} on a derived graph, hard flags pulled back through edge_origin.
  auto log_sum = [&](const std::vector<std::uint32_t>& trees, const std::vector<EdgeId>* origin, std::uint32_t hard) {
    std::uint32_t local = hard;
    if (origin) {
      local = 0;
      for (size_t e = 0; e < origin->size(); ++e)
        if (hard >> (*origin)[e] & 1u) local |= 1u << e;
    }
    double s = 0.0;
    for (std::uint32_t t : trees) s += std::pow(q, __builtin_popcount(t & local));
    return std::log(s);
  };
  const std::uint32_t fb = 1u << f;
  for (std::uint32_t rest = 0; rest < (1u << m); ++rest) {
    if (rest & fb) continue;
    const double rs = log_sum(trees_s, &sub.edge_origin, rest | fb) - log_sum(trees_s, &sub.edge_origin, rest);
    const double rg = log_sum(trees_g, nullptr, rest | fb) - log_sum(trees_g, nullptr, rest);
    const bool loop = !quo.edge_map[f].has_value();
    const double rq = loop ? 0.0 : log_sum(trees_q, &quo.edge_origin, rest | fb) - log_sum(trees_q, &quo.edge_origin, rest);
    rep.check(rs - rg, "subgraph>=graph rest=" + bits_string(rest, m));
    rep.check(rg - rq, "graph>=contraction rest=" + bits_string(rest, m));
  }
  return rep;
}

AuditReport audit_bulk_vs_boundary(double q, double p, double p_prime, const std::vector<int>& radii, long sweeps,
                                   std::uint64_t seed, std::vector<BulkBoundaryRow>* rows) {
  std::ostringstream inst;
  inst << "q=" << q << " p=" << p << " p'=" << p_prime;
  AuditReport rep;
  rep.id = "bulk-vs-boundary";
  rep.instance = inst.str();
  rep.seed = seed;
  nlohmann::json table = nlohmann::json::array();
  for (int n : radii) {
    auto free_box = std::make_shared<const FiniteGraph>(build_box(2, n, false));
    auto wired_box = std::make_shared<const FiniteGraph>(build_box(2, n, true));
    const EdgeId ef = central_edge(*free_box);
    const EdgeId ew = central_edge(*wired_box);
    BulkBoundaryRow row;
    row.n = n;
    if (free_box->num_edges() <= kMaxEnumerationEdges) {
      row.method = "exact";
      row.free_upper_p = enumerate(MeasureSpec::full(free_box, p_prime, q, Boundary::free)).marginal(ef);
      row.wired_lower_p = enumerate(MeasureSpec::full(wired_box, p, q, Boundary::wired)).marginal(ew);
    } else {
      row.method = "mcmc";
      ChainSettings s;
      s.seed = derive_seed(seed, static_cast<std::uint64_t>(n));
      s.burnin = sweeps / 10;
      s.observed_edge = ef;
      Chain a(MeasureSpec::full(free_box, p_prime, q, Boundary::free), s);
      a.run(sweeps);
      s.observed_edge = ew;
      s.seed = derive_seed(seed, 1000 + static_cast<std::uint64_t>(n));
      Chain b(MeasureSpec::full(wired_box, p, q, Boundary::wired), s);
      b.run(sweeps);
      const auto sa = a.summary(), sb = b.summary();
      row.free_upper_p = sa.marginal;
      row.wired_lower_p = sb.marginal;
      row.stderr = std::sqrt(sa.marginal_stderr * sa.marginal_stderr + sb.marginal_stderr * sb.marginal_stderr);
    }
    row.difference = row.free_upper_p - row.wired_lower_p;
    ++rep.cases;
    table.push_back({{"n", n},
                     {"method", row.method},
                     {"free_p_prime", row.free_upper_p},
                     {"wired_p", row.wired_lower_p},
                     {"difference", row.difference},
                     {"stderr", row.stderr}});
    if (rows) rows->push_back(row);
  }
  rep.worst_margin = 0.0;
  rep.details["rows"] = table;
  return rep;
}

}  // namespace detcond
