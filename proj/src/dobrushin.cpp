#include "detcond/dobrushin.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "detcond/model.hpp"
#include "detcond/random.hpp"
#include "detcond/spanning_tree.hpp"

namespace detcond {

namespace {

std::optional<VertexId> merged_vertex(const FiniteGraph& g) {
  if (g.dimension() == 0) return std::nullopt;
  for (VertexId v = 0; v < g.num_vertices(); ++v)
    if (!g.has_coordinate(v)) return v;
  return std::nullopt;
}

int coordinate_radius(const FiniteGraph& g) {
  int r = 0;
  for (VertexId v = 0; v < g.num_vertices(); ++v)
    if (g.has_coordinate(v))
      for (int c : g.coordinate(v)) r = std::max(r, std::abs(c));
  return r;
}

FiniteGraph free_version(const FiniteGraph& box) {
  if (box.dimension() == 0) throw GraphError("lattice index needs a box with coordinates");
  if (merged_vertex(box)) return build_box(box.dimension(), coordinate_radius(box) + 1, false);
  return box;
}

VertexId pin_of(const FiniteGraph& g) { return g.boundary().empty() ? 0 : g.boundary().front(); }

Eigen::VectorXd edge_source(const FiniteGraph& g, EdgeId f) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(g.num_vertices());
  const auto [lo, hi] = oriented(g.edge(f));
  b[hi] += 1.0;
  b[lo] -= 1.0;
  return b;
}

void sites_at_distance(int d, int r, std::vector<Point>& out) {
  Point x(d, -r);
  while (true) {
    int m = 0;
    for (int c : x) m = std::max(m, std::abs(c));
    if (m == r) out.push_back(x);
    int i = d - 1;
    while (i >= 0 && x[i] == r) x[i--] = -r;
    if (i < 0) break;
    ++x[i];
  }
}

}  // namespace

std::string to_string(ProbeStrategy s) {
  switch (s) {
    case ProbeStrategy::all: return "all";
    case ProbeStrategy::extremal: return "extremal";
    case ProbeStrategy::random: return "random";
  }
  return "?";
}

ProbeStrategy parse_probe_strategy(const std::string& s) {
  if (s == "all") return ProbeStrategy::all;
  if (s == "extremal") return ProbeStrategy::extremal;
  if (s == "random") return ProbeStrategy::random;
  throw std::invalid_argument("unknown probe strategy: " + s);
}

std::string to_string(KappaStrategy s) {
  switch (s) {
    case KappaStrategy::all_soft: return "all-soft";
    case KappaStrategy::all_hard: return "all-hard";
    case KappaStrategy::random: return "random";
  }
  return "?";
}

KappaStrategy parse_kappa_strategy(const std::string& s) {
  if (s == "all-soft") return KappaStrategy::all_soft;
  if (s == "all-hard") return KappaStrategy::all_hard;
  if (s == "random") return KappaStrategy::random;
  throw std::invalid_argument("unknown kappa strategy: " + s);
}

LatticeIndex::LatticeIndex(const FiniteGraph& box)
    : box_(&box), free_box_(free_version(box)), radius_(coordinate_radius(free_box_)), merged_(merged_vertex(box)) {
  from_free_.assign(free_box_.num_edges(), -1);
  for (EdgeId e = 0; e < box.num_edges(); ++e) from_free_[merged_ ? box.source_edge(e) : e] = e;
  bonds_.resize(box.num_edges());
  for (EdgeId fe = 0; fe < free_box_.num_edges(); ++fe) {
    const EdgeId e = from_free_[fe];
    if (e < 0) continue;
    const auto [lo, hi] = oriented(free_box_.edge(fe));
    const Point& a = free_box_.coordinate(lo);
    const Point& b = free_box_.coordinate(hi);
    int dir = 0;
    while (a[dir] == b[dir]) ++dir;
    bonds_[e] = LatticeBond{a, dir};
  }
}

std::optional<LatticeEdge> LatticeIndex::find(const Point& x, int direction) const {
  if (direction < 0 || direction >= free_box_.dimension()) return std::nullopt;
  Point y = x;
  y[direction] += 1;
  const auto ft = free_box_.find_vertex(x);
  const auto fh = free_box_.find_vertex(y);
  if (!ft || !fh) return std::nullopt;
  const auto fe = free_box_.find_edge(*ft, *fh);
  if (!fe || from_free_[*fe] < 0) return std::nullopt;
  if (!merged_) return LatticeEdge{*fe, *ft, *fh};
  const auto t = box_->find_vertex(x);
  const auto h = box_->find_vertex(y);
  return LatticeEdge{from_free_[*fe], t ? *t : *merged_, h ? *h : *merged_};
}

std::optional<double> DobrushinReport::entry_at(const Point& x, int direction) const {
  for (const auto& e : entries)
    if (e.bond.tail == x && e.bond.direction == direction) return e.value;
  return std::nullopt;
}

nlohmann::json DobrushinReport::to_json() const {
  nlohmann::json es = nlohmann::json::array();
  for (const auto& e : entries)
    es.push_back({{"edge", e.edge}, {"tail", e.bond.tail}, {"direction", e.bond.direction}, {"value", e.value}});
  return {{"dimension", dimension},
          {"radius", radius},
          {"bc", wired ? "wired" : "free"},
          {"p", p},
          {"q", q},
          {"f", f},
          {"probes", to_string(probes)},
          {"configurations", configurations},
          {"seed", seed},
          {"row_sum", row_sum},
          {"certified", certified},
          {"entries", es}};
}

DobrushinReport dobrushin_bound(const FiniteGraph& box, double p, double q, EdgeId f, ProbeStrategy probes,
                                long samples, std::uint64_t seed) {
  const int m = box.num_edges();
  if (f < 0 || f >= m) throw std::invalid_argument("edge out of range");
  const LatticeIndex index(box);
  DobrushinReport rep;
  rep.dimension = box.dimension();
  rep.radius = index.radius();
  rep.wired = merged_vertex(box).has_value();
  rep.p = p;
  rep.q = q;
  rep.f = f;
  rep.probes = probes;
  rep.seed = seed;

  std::vector<Configuration> configs;
  switch (probes) {
    case ProbeStrategy::all:
      if (m > kMaxEnumerationEdges) throw SizeCapError("probing every configuration needs at most 20 edges");
      for (std::uint32_t bits = 0; bits < (1u << m); ++bits) {
        Configuration k(m);
        for (int e = 0; e < m; ++e) k[e] = (bits >> e) & 1u;
        configs.push_back(std::move(k));
      }
      break;
    case ProbeStrategy::extremal:
      configs.push_back(Configuration(m, 0));
      configs.push_back(Configuration(m, 1));
      break;
    case ProbeStrategy::random: {
      Rng rng(seed);
      for (long s = 0; s < samples; ++s) {
        Configuration k(m);
        for (int e = 0; e < m; ++e) k[e] = uniform01(rng) < 0.5;
        configs.push_back(std::move(k));
      }
      break;
    }
  }
  rep.configurations = static_cast<long>(configs.size());
  rep.certified = probes == ProbeStrategy::all;

  const double prefactor = p * (1.0 - p) * (q - 1.0) * (q - 1.0);
  std::vector<double> best(m, 0.0);
  if (prefactor != 0.0) {
    const VertexId pin = pin_of(box);
    const Eigen::VectorXd source = edge_source(box, f);
    for (const Configuration& k : configs) {
      const Conductances c(q, k);
      const Eigen::VectorXd phi = PinnedSolver(box, c.weights(), pin).potential(source);
      for (EdgeId g = 0; g < m; ++g) {
        if (g == f || box.is_self_loop(g)) continue;
        const auto [lo, hi] = oriented(box.edge(g));
        const double bb = phi[hi] - phi[lo];
        best[g] = std::max(best[g], prefactor * c.value(f) * c.value(g) * bb * bb);
      }
    }
  }
  for (EdgeId g = 0; g < m; ++g) {
    if (g == f) continue;
    rep.entries.push_back(DobrushinEntry{g, index.bond(g), best[g]});
    rep.row_sum += best[g];
  }
  return rep;
}

nlohmann::json DecayFit::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) rs.push_back({{"r", r.r}, {"mean_abs_grad2_G", r.mean_abs}});
  return {{"dimension", dimension},
          {"radius", radius},
          {"q", q},
          {"kappa", to_string(kappa)},
          {"samples", samples},
          {"seed", seed},
          {"rows", rs},
          {"exponent", exponent},
          {"exponent_stderr", exponent_stderr},
          {"residual_rms", residual_rms}};
}

DecayFit green_decay_fit(int dimension, int radius, double q, KappaStrategy kappa, int r_min, int r_max, int samples,
                         std::uint64_t seed) {
  if (dimension < 2 || dimension > 4) throw std::invalid_argument("decay fit supports d = 2, 3, 4");
  if (r_min < 1 || r_max < 10 * r_min) throw std::invalid_argument("decay fit needs r_max >= 10 r_min");
  if (r_max >= radius) throw std::invalid_argument("decay fit needs r_max < radius");
  if (samples < 1) throw std::invalid_argument("decay fit needs at least one sample");
  if (kappa != KappaStrategy::random) samples = 1;

  const FiniteGraph box = build_box(dimension, radius, true);
  const LatticeIndex index(box);
  const auto f = index.find(Point(dimension, 0), 0);
  if (!f) throw GraphError("box has no central edge");

  std::vector<std::vector<LatticeEdge>> shells;
  for (int r = r_min; r <= r_max; ++r) {
    std::vector<Point> sites;
    sites_at_distance(dimension, r, sites);
    std::vector<LatticeEdge> edges;
    for (const Point& y : sites)
      for (int j = 0; j < dimension; ++j)
        if (const auto e = index.find(y, j)) edges.push_back(*e);
    shells.push_back(std::move(edges));
  }

  DecayFit fit;
  fit.dimension = dimension;
  fit.radius = radius;
  fit.q = q;
  fit.kappa = kappa;
  fit.samples = samples;
  fit.seed = seed;
  std::vector<double> sums(shells.size(), 0.0);
  Rng rng(seed);
  const VertexId pin = pin_of(box);
  for (int s = 0; s < samples; ++s) {
    Configuration k(box.num_edges(), kappa == KappaStrategy::all_hard ? 1 : 0);
    if (kappa == KappaStrategy::random)
      for (auto& x : k) x = uniform01(rng) < 0.5;
    const Conductances c(q, k);
    Eigen::VectorXd source = Eigen::VectorXd::Zero(box.num_vertices());
    source[f->head] += 1.0;
    source[f->tail] -= 1.0;
    const Eigen::VectorXd phi = PinnedSolver(box, c.weights(), pin).potential(source);
    for (size_t i = 0; i < shells.size(); ++i) {
      double acc = 0.0;
      for (const LatticeEdge& e : shells[i]) acc += std::abs(phi[e.head] - phi[e.tail]);
      sums[i] += acc / static_cast<double>(shells[i].size());
    }
  }

  std::vector<double> xs, ys;
  for (size_t i = 0; i < shells.size(); ++i) {
    const int r = r_min + static_cast<int>(i);
    fit.rows.push_back(DecayRow{r, sums[i] / samples});
    xs.push_back(std::log(static_cast<double>(r)));
    ys.push_back(std::log(fit.rows.back().mean_abs));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double res = ys[i] - (my + slope * (xs[i] - mx));
    ssr += res * res;
  }
  fit.exponent = -slope;
  fit.residual_rms = std::sqrt(ssr / n);
  fit.exponent_stderr = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
  return fit;
}

void write_decay_csv(std::ostream& out, const DecayFit& fit) {
  out << "r,mean_abs_grad2_G,fit_exponent\n" << std::setprecision(17);
  for (const auto& r : fit.rows) out << r.r << ',' << r.mean_abs << ',' << fit.exponent << '\n';
}

}  // namespace detcond
