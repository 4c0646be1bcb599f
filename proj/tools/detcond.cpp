#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "detcond/audit.hpp"
#include "detcond/dobrushin.hpp"
#include "detcond/duality.hpp"
#include "detcond/gaussian.hpp"
#include "detcond/mcmc.hpp"
#include "detcond/model.hpp"
#include "detcond/spanning_tree.hpp"
#include "experiment.hpp"

using namespace detcond;
using namespace detcond::cli;

namespace {

constexpr int kCliEnumerateCap = kMaxTreeEnumerationEdges;

struct Options {
  std::string graph;
  std::string p = "0.5";
  std::string p2 = "0.8";
  double q = 2.0;
  std::vector<int> n;
  std::vector<std::string> ps;
  std::vector<double> qs;
  std::vector<std::string> bcs;
  std::vector<std::string> seeds;
  std::string bc = "free";
  long sweeps = 1000;
  long burnin = 1000;
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
  bool resume = false;
  long halt_after = -1;
  long checkpoint_every = -1;
  bool sweeps_given = false;
  bool burnin_given = false;
  long pairs = 100000;
  int max_len = 12;
  long samples = 100000;
  int thin = 1;
  int fields = 0;
  std::string kappa = "all-soft";
  std::string probes = "extremal";
  bool decay = false;
  int dimension = 2;
  int radius = 100;
  int r_min = 2;
  int r_max = 20;
  EdgeId edge = 0;
  std::vector<EdgeId> subgraph;
  std::vector<EdgeId> contract;
};

void emit(const std::string& out, const std::string& text) {
  if (out.empty())
    std::cout << text;
  else
    write_file_atomic(out, text);
}

std::string dump(const nlohmann::json& j) { return j.dump(1) + "\n"; }

Boundary boundary_of(const std::string& s) {
  try {
    return parse_boundary(s);
  } catch (const std::exception&) {
    throw ConfigError("unknown boundary condition: " + s);
  }
}

int first_n(const Options& o, int fallback) { return o.n.empty() ? fallback : o.n.front(); }

std::shared_ptr<const FiniteGraph> graph_or_box(const Options& o, const std::string& fallback) {
  if (!o.graph.empty()) return std::make_shared<const FiniteGraph>(load_graph(o.graph));
  if (!o.n.empty()) return std::make_shared<const FiniteGraph>(build_box(2, o.n.front(), boundary_of(o.bc) == Boundary::wired));
  if (!fallback.empty()) return std::make_shared<const FiniteGraph>(load_graph(fallback));
  throw ConfigError("--graph or --n is required");
}

int cmd_enumerate(const Options& o) {
  if (o.graph.empty() && o.n.empty()) throw ConfigError("--graph or --n is required");
  auto g = graph_or_box(o, "");
  if (g->num_edges() > kCliEnumerateCap)
    throw SizeCapError("enumerate accepts at most " + std::to_string(kCliEnumerateCap) + " edges, graph has " +
                       std::to_string(g->num_edges()));
  const double p = parse_p(o.p, o.q);
  const ExactDistribution d = enumerate(MeasureSpec::full(g, p, o.q, boundary_of(o.bc)));
  std::ostringstream s;
  d.write_csv(s);
  emit(o.out, s.str());

  nlohmann::json marginals{{"graph", o.graph.empty() ? "box" : o.graph}, {"p", p}, {"q", o.q}, {"edges", d.num_active()}};
  std::vector<double> m;
  for (int i = 0; i < d.num_active(); ++i) m.push_back(d.marginal(i));
  marginals["hard_marginals"] = m;
  if (o.out.empty())
    std::cerr << dump(marginals);
  else
    write_file_atomic(o.out + ".marginals.json", dump(marginals));
  return kExitOk;
}

int cmd_sample(const Options& o) {
  auto g = graph_or_box(o, "");
  const double p = parse_p(o.p, o.q);
  const Boundary bc = boundary_of(o.bc);
  const MeasureSpec spec = MeasureSpec::full(g, p, o.q, bc);
  ChainSettings s;
  s.seed = o.seed;
  s.burnin = o.burnin;
  s.observed_edge = o.graph.empty() ? central_edge(*g) : 0;
  Chain chain(spec, s);
  std::ostringstream csv;
  csv << "sweep,hard_count,config_bits\n";
  for (long i = 0; i < o.burnin + o.sweeps; ++i) {
    chain.sweep();
    if (chain.sweeps_done() <= o.burnin || (chain.sweeps_done() - o.burnin) % o.thin != 0) continue;
    csv << chain.sweeps_done() << ',' << chain.hard_count() << ',';
    for (auto x : chain.kappa()) csv << (x ? '1' : '0');
    csv << '\n';
  }
  emit(o.out, csv.str());
  std::cerr << dump(chain.to_json().at("summary"));
  return kExitOk;
}

SweepConfig sweep_config(const Options& o) {
  ConfigMap m;
  if (!o.config.empty()) m = load_config(o.config);
  auto set_list = [&](const std::string& key, const std::vector<std::string>& v) {
    if (!v.empty()) m[key] = v;
  };
  auto to_strings = [](const auto& v) {
    std::vector<std::string> s;
    for (const auto& x : v) {
      std::ostringstream t;
      t << std::setprecision(17) << x;
      s.push_back(t.str());
    }
    return s;
  };
  if (!o.graph.empty()) m["graph"] = {o.graph};
  set_list("n", to_strings(o.n));
  set_list("p", o.ps);
  set_list("q", to_strings(o.qs));
  set_list("bc", o.bcs);
  set_list("seed", o.seeds);
  if (o.sweeps_given || !m.count("sweeps")) m["sweeps"] = {std::to_string(o.sweeps)};
  if (o.burnin_given || !m.count("burnin")) m["burnin"] = {std::to_string(o.burnin)};
  if (o.checkpoint_every > 0) m["checkpoint_every"] = {std::to_string(o.checkpoint_every)};
  if (!o.out.empty()) m["out"] = {o.out};
  return SweepConfig::from_map(m);
}

int cmd_sweep(const Options& o) {
  const SweepConfig config = sweep_config(o);
  SweepOptions opts;
  opts.resume = o.resume;
  if (o.halt_after > 0) opts.halt_after = o.halt_after;
  const SweepOutcome outcome = run_sweep(config, opts);
  if (outcome.halted) {
    std::cerr << "sweep halted; rerun with --resume to continue\n";
    return kExitHalted;
  }
  std::cout << sweep_csv_header() << "\n";
  for (const auto& r : outcome.results) std::cout << sweep_csv_row(r) << "\n";
  return kExitOk;
}

std::vector<EdgeId> default_subgraph(const FiniteGraph& g) {
  std::vector<EdgeId> s;
  for (EdgeId e = 0; e + 1 < g.num_edges(); ++e) s.push_back(e);
  return s;
}

int cmd_audit(const std::string& which, const Options& o) {
  nlohmann::json out;
  bool ok = true;
  auto take = [&](const AuditReport& r) {
    out = r.to_json();
    ok = r.ok();
  };
  if (which == "fkg") {
    auto g = graph_or_box(o, "");
    const MeasureSpec spec = MeasureSpec::full(g, parse_p(o.p, o.q), o.q, boundary_of(o.bc));
    if (spec.num_active() > kMaxEnumerationEdges) throw SizeCapError("FKG audit needs at most 20 edges");
    take(spec.num_active() <= 6 ? audit_fkg_lattice(spec, o.graph, o.seed, o.pairs)
                                : audit_fkg_lattice_sampled(spec, o.graph, o.seed, o.pairs));
  } else if (which == "two-edge") {
    auto g = graph_or_box(o, "");
    take(audit_two_edge_determinant(*g, o.q, o.graph));
  } else if (which == "duality") {
    auto g = graph_or_box(o, "");
    if (g->num_edges() > kMaxEnumerationEdges) throw SizeCapError("duality audit needs at most 20 edges");
    const double p = parse_p(o.p, o.q);
    const double tv = check_duality_pushforward(*g, p, o.q);
    ok = tv <= 1e-10;
    out = {{"id", "duality"}, {"instance", o.graph}, {"p", p}, {"p_star", dual_parameter(p, o.q)},
           {"q", o.q},        {"tv", tv},           {"ok", ok}};
  } else if (which == "holley") {
    auto g = graph_or_box(o, "");
    const MeasureSpec lo = MeasureSpec::full(g, parse_p(o.p, o.q), o.q, boundary_of(o.bc));
    const MeasureSpec hi = MeasureSpec::full(g, parse_p(o.p2, o.q), o.q, boundary_of(o.bc));
    if (lo.num_active() > kMaxEnumerationEdges) throw SizeCapError("Holley audit needs at most 20 edges");
    take(audit_holley_pair(lo, hi, o.graph + " p=" + o.p + " p'=" + o.p2));
  } else if (which == "free-wired") {
    take(audit_free_wired(first_n(o, 1), parse_p(o.p, o.q), o.q));
  } else if (which == "contraction") {
    auto g = graph_or_box(o, "");
    std::vector<EdgeId> sub = o.subgraph.empty() ? default_subgraph(*g) : o.subgraph;
    std::vector<EdgeId> con = o.contract.empty() ? std::vector<EdgeId>{g->num_edges() - 1} : o.contract;
    take(audit_subgraph_contraction(*g, sub, con, o.edge, o.q, o.graph));
  } else if (which == "bulk") {
    std::vector<BulkBoundaryRow> rows;
    const std::vector<int> radii = o.n.empty() ? std::vector<int>{1, 2, 3} : o.n;
    take(audit_bulk_vs_boundary(o.q, parse_p(o.p, o.q), parse_p(o.p2, o.q), radii, o.sweeps, o.seed, &rows));
  } else {
    throw ConfigError("unknown audit '" + which + "' (fkg, two-edge, duality, holley, free-wired, contraction, bulk)");
  }
  emit(o.out, dump(out));
  return ok ? kExitOk : kExitViolation;
}

int cmd_duality(const Options& o) {
  const double p = parse_p(o.p, o.q);
  const double ps = dual_parameter(p, o.q);
  nlohmann::json j{{"p", p},
                   {"q", o.q},
                   {"p_star", ps},
                   {"p_star_star", dual_parameter(ps, o.q)},
                   {"self_dual_point", self_dual_point(o.q)}};
  if (!o.graph.empty()) {
    auto g = std::make_shared<const FiniteGraph>(load_graph(o.graph));
    if (g->num_edges() > kMaxEnumerationEdges) throw SizeCapError("duality check needs at most 20 edges");
    const DualMap dm = make_dual_map(g);
    std::ostringstream dual_text;
    write_graph(dual_text, *dm.dual);
    j["graph"] = o.graph;
    j["tv"] = check_duality_pushforward(*g, p, o.q);
    j["dual_graph"] = dual_text.str();
  }
  emit(o.out, dump(j));
  return kExitOk;
}

int cmd_contours(const Options& o) {
  const double p = parse_p(o.p, o.q);
  const ContourReport rep = estimate_contour_frequency(first_n(o, 8), p, o.q, o.max_len, o.sweeps, o.burnin, o.seed);
  emit(o.out, dump(rep.to_json()));
  return kExitOk;
}

int cmd_gaussian(const Options& o) {
  auto g = graph_or_box(o, "wired1");
  const double p = parse_p(o.p, o.q);
  if (o.fields > 0) {
    const KappaStrategy ks = parse_kappa_strategy(o.kappa);
    Configuration k(g->num_edges(), ks == KappaStrategy::all_hard ? 1 : 0);
    if (ks == KappaStrategy::random) {
      Rng rng(derive_seed(o.seed, 7));
      for (auto& x : k) x = uniform01(rng) < p;
    }
    const PinnedGaussianSampler sampler(g, Conductances(o.q, k));
    std::ostringstream s;
    write_field_csv(s, sampler.sample(o.seed, o.fields));
    emit(o.out, s.str());
    return kExitOk;
  }
  if (g->num_edges() > kMaxEnumerationEdges) throw SizeCapError("roundtrip needs at most 20 edges");
  const RoundtripReport rep = two_layer_roundtrip(g, p, o.q, o.samples, o.seed, o.thin, 5, o.burnin);
  emit(o.out, dump(rep.to_json()));
  return kExitOk;
}

int cmd_dobrushin(const Options& o) {
  if (o.decay) {
    const DecayFit fit =
        green_decay_fit(o.dimension, o.radius, o.q, parse_kappa_strategy(o.kappa), o.r_min, o.r_max,
                        static_cast<int>(std::max<long>(1, std::min<long>(o.samples, 1000))), o.seed);
    std::ostringstream s;
    write_decay_csv(s, fit);
    emit(o.out, s.str());
    std::cerr << dump(fit.to_json());
    return kExitOk;
  }
  auto g = graph_or_box(o, "");
  const EdgeId f = o.graph.empty() ? central_edge(*g) : o.edge;
  const DobrushinReport rep =
      dobrushin_bound(*g, parse_p(o.p, o.q), o.q, f, parse_probe_strategy(o.probes), o.samples, o.seed);
  emit(o.out, dump(rep.to_json()));
  return kExitOk;
}

int cmd_report(const Options& o) {
  const std::string dir = o.out.empty() ? "sweep_out" : o.out;
  std::cout << dump(sweep_report(dir + "/sweep.csv"));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Determinantal random conductance model toolkit"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--graph", o.graph, "builtin name (triangle, c4, k4, grid2x2, grid2x3, wired1, star4, box:d:n:bc) or file");
    c->add_option("--p", o.p, "hard-edge parameter p, or p_sd for the self-dual point");
    c->add_option("--q", o.q, "hard conductance q >= 1");
    c->add_option("--n", o.n, "box radius");
    c->add_option("--bc", o.bc, "free or wired");
    c->add_option("--sweeps", o.sweeps, "sweeps after burn-in");
    c->add_option("--burnin", o.burnin, "burn-in sweeps");
    c->add_option("--seed", o.seed, "seed");
    c->add_option("--out", o.out, "output file (directory for sweep/report)");
  };

  auto* en = app.add_subcommand("enumerate", "exact distribution as CSV plus marginals JSON (at most 16 edges)");
  add_common(en);
  auto* sa = app.add_subcommand("sample", "heat-bath chain; CSV of configurations, summary on stderr");
  add_common(sa);
  sa->add_option("--thin", o.thin, "record every k-th sweep")->check(CLI::PositiveNumber);

  auto* sw = app.add_subcommand("sweep", "grid of chains with checkpoints");
  sw->add_option("--config", o.config, "key = value configuration file");
  sw->add_option("--graph", o.graph, "graph instead of boxes");
  sw->add_option("--n", o.n, "box radii");
  sw->add_option("--p", o.ps, "p values (p_sd allowed)");
  sw->add_option("--q", o.qs, "q values");
  sw->add_option("--bc", o.bcs, "boundary conditions");
  sw->add_option("--seed", o.seeds, "seeds");
  sw->add_option("--sweeps", o.sweeps, "sweeps after burn-in");
  sw->add_option("--burnin", o.burnin, "burn-in sweeps");
  sw->add_option("--checkpoint-every", o.checkpoint_every, "sweeps between checkpoints");
  sw->add_option("--out", o.out, "output directory");
  sw->add_flag("--resume", o.resume, "continue from checkpoints and finished cells");
  sw->add_option("--halt-after", o.halt_after, "stop each cell at the first checkpoint after this many sweeps");

  std::string which;
  auto* au = app.add_subcommand("audit", "correlation-inequality and duality audits");
  au->add_option("which", which, "fkg, two-edge, duality, holley, free-wired, contraction, bulk")->required();
  add_common(au);
  au->add_option("--p2", o.p2, "upper p for holley and bulk");
  au->add_option("--pairs", o.pairs, "random FKG pairs");
  au->add_option("--edge", o.edge, "edge f for contraction");
  au->add_option("--subgraph", o.subgraph, "subgraph edges for contraction");
  au->add_option("--contract", o.contract, "contracted edges for contraction");

  auto* du = app.add_subcommand("duality", "dual parameter and pushforward check");
  add_common(du);
  auto* co = app.add_subcommand("contours", "contour frequencies against the Peierls bound");
  add_common(co);
  co->add_option("--max-len", o.max_len, "longest contour");
  auto* ga = app.add_subcommand("gaussian", "two-layer roundtrip or field samples");
  add_common(ga);
  ga->add_option("--samples", o.samples, "pipeline samples");
  ga->add_option("--thin", o.thin, "sweeps between pipeline samples")->check(CLI::PositiveNumber);
  ga->add_option("--fields", o.fields, "write this many field samples as CSV instead");
  ga->add_option("--kappa", o.kappa, "all-soft, all-hard or random for --fields");
  auto* dob = app.add_subcommand("dobrushin", "interdependence bounds or Green decay fit");
  add_common(dob);
  dob->add_option("--probes", o.probes, "all, extremal or random");
  dob->add_option("--samples", o.samples, "random probes, or kappa samples for --decay");
  dob->add_option("--edge", o.edge, "edge f for non-box graphs");
  dob->add_flag("--decay", o.decay, "Green's-gradient decay fit as CSV");
  dob->add_option("--d", o.dimension, "dimension for --decay");
  dob->add_option("--radius", o.radius, "wired box radius for --decay");
  dob->add_option("--rmin", o.r_min, "smallest distance");
  dob->add_option("--rmax", o.r_max, "largest distance");
  dob->add_option("--kappa", o.kappa, "all-soft, all-hard or random");
  auto* re = app.add_subcommand("report", "free vs wired comparison of a finished sweep");
  re->add_option("--out", o.out, "sweep output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    o.sweeps_given = sw->count("--sweeps") > 0;
    o.burnin_given = sw->count("--burnin") > 0;
    if (en->parsed()) return cmd_enumerate(o);
    if (sa->parsed()) return cmd_sample(o);
    if (sw->parsed()) return cmd_sweep(o);
    if (au->parsed()) return cmd_audit(which, o);
    if (du->parsed()) return cmd_duality(o);
    if (co->parsed()) return cmd_contours(o);
    if (ga->parsed()) return cmd_gaussian(o);
    if (dob->parsed()) return cmd_dobrushin(o);
    if (re->parsed()) return cmd_report(o);
  } catch (const SizeCapError& e) {
    std::cerr << "size cap: " << e.what() << "\n";
    return kExitSizeCap;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint: " << e.what() << "\n";
    return kExitCheckpoint;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
