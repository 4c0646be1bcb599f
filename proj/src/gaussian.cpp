#include "detcond/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "detcond/mcmc.hpp"
#include "detcond/model.hpp"

namespace detcond {

namespace {

double log_or_neg_inf(double x) { return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

bool has_merged_vertex(const FiniteGraph& g) {
  if (g.dimension() == 0) return false;
  for (VertexId v = 0; v < g.num_vertices(); ++v)
    if (!g.has_coordinate(v)) return true;
  return false;
}

int box_radius(const FiniteGraph& box) {
  int r = 0;
  for (VertexId v = 0; v < box.num_vertices(); ++v)
    if (box.has_coordinate(v))
      for (int c : box.coordinate(v)) r = std::max(r, std::abs(c));
  return has_merged_vertex(box) ? r + 1 : r;
}

PlaquetteSide side(const FiniteGraph& box, const Point& x, int direction, int orientation) {
  const auto le = lattice_edge(box, x, direction);
  if (!le || le->tail == le->head) return {};
  const auto [lo, hi] = oriented(box.edge(le->edge));
  const int s = (le->tail == lo && le->head == hi) ? 1 : -1;
  return {le->edge, s * orientation};
}

}  // namespace

double potential(double x, double p, double q) {
  const double a = log_or_neg_inf(p) - 0.5 * q * x * x;
  const double b = log_or_neg_inf(1.0 - p) - 0.5 * x * x;
  const double m = std::max(a, b);
  return -(m + std::log(std::exp(a - m) + std::exp(b - m)));
}

double conditional_kappa_given_eta(double eta, double p, double q) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double d = std::log((1.0 - p) / p) + 0.5 * (q - 1.0) * eta * eta;
  if (d > 0.0) {
    const double t = std::exp(-d);
    return t / (1.0 + t);
  }
  return 1.0 / (1.0 + std::exp(d));
}

double lattice_gradient(const FiniteGraph& box, const GradientField& field, const Point& x, int direction) {
  const PlaquetteSide s = side(box, x, direction, 1);
  return s.edge < 0 ? 0.0 : s.sign * field.eta[s.edge];
}

std::vector<Plaquette> box_plaquettes(const FiniteGraph& box) {
  if (box.dimension() != 2) throw GraphError("plaquettes need a two-dimensional box");
  const int r = box_radius(box);
  std::vector<Plaquette> out;
  for (int a = -r; a < r; ++a)
    for (int b = -r; b < r; ++b) {
      const Point x{a, b}, right{a + 1, b}, up{a, b + 1};
      out.push_back(Plaquette{side(box, x, 0, 1), side(box, right, 1, 1), side(box, up, 0, -1), side(box, x, 1, -1)});
    }
  return out;
}

double plaquette_defect(const std::vector<Plaquette>& plaquettes, const GradientField& field) {
  double worst = 0.0;
  for (const Plaquette& pl : plaquettes) {
    double s = 0.0;
    for (const PlaquetteSide& sd : pl)
      if (sd.edge >= 0) s += sd.sign * field.eta[sd.edge];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

double plaquette_defect(const FiniteGraph& box, const GradientField& field) {
  return plaquette_defect(box_plaquettes(box), field);
}

PinnedGaussianSampler::PinnedGaussianSampler(std::shared_ptr<const FiniteGraph> g, Conductances k)
    : graph_(std::move(g)), k_(std::move(k)) {
  const FiniteGraph& G = *graph_;
  if (k_.size() != G.num_edges()) throw LinalgError("conductances do not match graph");
  std::vector<char> pinned(G.num_vertices(), 0);
  if (G.boundary().empty())
    pinned[0] = 1;
  else
    for (VertexId b : G.boundary()) pinned[b] = 1;
  index_.assign(G.num_vertices(), -1);
  for (VertexId v = 0; v < G.num_vertices(); ++v)
    if (!pinned[v]) {
      index_[v] = static_cast<int>(interior_.size());
      interior_.push_back(v);
    }
  const int n = unknowns();
  std::vector<Eigen::Triplet<double>> trip;
  for (EdgeId e = 0; e < G.num_edges(); ++e) {
    const Edge& ed = G.edge(e);
    if (ed.u == ed.v) continue;
    const double w = k_.value(e);
    const int a = index_[ed.u], b = index_[ed.v];
    if (a >= 0) trip.emplace_back(a, a, w);
    if (b >= 0) trip.emplace_back(b, b, w);
    if (a >= 0 && b >= 0) {
      trip.emplace_back(a, b, -w);
      trip.emplace_back(b, a, -w);
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  if (n == 0) return;
  dense_ = n <= PinnedSolver::kDenseLimit;
  if (dense_) {
    dense_llt_.compute(Eigen::MatrixXd(A));
    if (dense_llt_.info() != Eigen::Success) throw LinalgError("Dirichlet Laplacian is not positive definite");
  } else {
    sparse_llt_.compute(A);
    if (sparse_llt_.info() != Eigen::Success) throw LinalgError("Dirichlet Laplacian is not positive definite");
  }
}

Eigen::VectorXd PinnedGaussianSampler::solve(const Eigen::VectorXd& b) const {
  if (b.size() == 0) return b;
  return dense_ ? Eigen::VectorXd(dense_llt_.solve(b)) : Eigen::VectorXd(sparse_llt_.solve(b));
}

Eigen::VectorXd PinnedGaussianSampler::edge_vector(EdgeId f) const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(unknowns());
  const auto [lo, hi] = oriented(graph_->edge(f));
  if (lo == hi) return b;
  if (index_[hi] >= 0) b[index_[hi]] += 1.0;
  if (index_[lo] >= 0) b[index_[lo]] -= 1.0;
  return b;
}

GradientField PinnedGaussianSampler::sample(Rng& rng) const {
  const int n = unknowns();
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = standard_normal(rng);
  Eigen::VectorXd x;
  if (n == 0)
    x = z;
  else if (dense_)
    x = dense_llt_.matrixU().solve(z);
  else
    x = sparse_llt_.permutationPinv() * Eigen::VectorXd(sparse_llt_.matrixU().solve(z));

  GradientField field;
  field.phi.assign(graph_->num_vertices(), 0.0);
  for (int i = 0; i < n; ++i) field.phi[interior_[i]] = x[i];
  field.eta.resize(graph_->num_edges());
  for (EdgeId e = 0; e < graph_->num_edges(); ++e) {
    const auto [lo, hi] = oriented(graph_->edge(e));
    field.eta[e] = field.phi[hi] - field.phi[lo];
  }
  return field;
}

std::vector<GradientField> PinnedGaussianSampler::sample(std::uint64_t seed, int count) const {
  Rng rng(seed);
  std::vector<GradientField> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(sample(rng));
  return out;
}

double PinnedGaussianSampler::covariance(EdgeId f, EdgeId g) const {
  if (unknowns() == 0) return 0.0;
  return edge_vector(f).dot(solve(edge_vector(g)));
}

double PinnedGaussianSampler::vertex_variance(VertexId v) const {
  if (index_.at(v) < 0) return 0.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(unknowns());
  b[index_[v]] = 1.0;
  return solve(b)[index_[v]];
}

void write_field_csv(std::ostream& out, const std::vector<GradientField>& fields) {
  out << "edge_id,eta\n" << std::setprecision(17);
  for (const auto& f : fields)
    for (size_t e = 0; e < f.eta.size(); ++e) out << e << ',' << f.eta[e] << '\n';
}

bool RoundtripReport::bins_ok() const {
  return std::all_of(bins.begin(), bins.end(), [](const RoundtripBin& b) { return b.within; });
}

double RoundtripReport::max_variance_z() const {
  double z = 0.0;
  for (const auto& v : variances) z = std::max(z, std::abs(v.z));
  return z;
}

nlohmann::json RoundtripReport::to_json() const {
  nlohmann::json b = nlohmann::json::array();
  for (const auto& x : bins)
    b.push_back({{"eta2_low", x.eta2_low},
                 {"eta2_high", x.eta2_high},
                 {"hits", x.hits},
                 {"hard", x.hard},
                 {"empirical", x.empirical},
                 {"formula", x.formula},
                 {"ci_low", x.ci_low},
                 {"ci_high", x.ci_high},
                 {"checked", x.checked},
                 {"within", x.within}});
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : variances)
    v.push_back({{"edge", x.edge}, {"sample", x.sample}, {"exact", x.exact}, {"stderr", x.stderr}, {"z", x.z}});
  return {{"p", p},
          {"q", q},
          {"samples", samples},
          {"thinning", thinning},
          {"seed", seed},
          {"bin_edge", bin_edge},
          {"tv_kappa_prime", tv_kappa_prime},
          {"tv_kappa", tv_kappa},
          {"bins", b},
          {"bins_ok", bins_ok()},
          {"variances", v},
          {"max_variance_z", max_variance_z()}};
}

RoundtripReport two_layer_roundtrip(std::shared_ptr<const FiniteGraph> box, double p, double q, long samples,
                                    std::uint64_t seed, int thinning, int num_bins, long burnin) {
  if (samples < 1 || thinning < 1 || num_bins < 1) throw std::invalid_argument("roundtrip parameters");
  const Boundary bc = has_merged_vertex(*box) ? Boundary::wired : Boundary::free;
  const MeasureSpec spec = MeasureSpec::full(box, p, q, bc);
  const ExactDistribution exact = enumerate(spec);
  const int m = spec.num_active();

  std::vector<std::unique_ptr<PinnedGaussianSampler>> samplers(exact.size());
  auto sampler_for = [&](std::uint32_t bits) -> const PinnedGaussianSampler& {
    if (!samplers[bits]) samplers[bits] = std::make_unique<PinnedGaussianSampler>(box, Conductances(q, spec.join(bits)));
    return *samplers[bits];
  };

  ChainSettings cs;
  cs.seed = derive_seed(seed, 0);
  cs.burnin = burnin;
  Chain chain(spec, cs);
  chain.run(burnin);
  Rng rng(derive_seed(seed, 1));

  std::vector<long> count_kappa(exact.size(), 0), count_prime(exact.size(), 0);
  std::vector<double> eta2;
  std::vector<std::uint8_t> hard;
  eta2.reserve(samples);
  hard.reserve(samples);
  std::vector<double> m2(m, 0.0), m4(m, 0.0);
  const EdgeId bin_edge = box->dimension() > 0 ? central_edge(*box) : spec.active.front();

  for (long s = 0; s < samples; ++s) {
    chain.run(thinning);
    const std::uint32_t bits = spec.bits_of(chain.kappa());
    const GradientField field = sampler_for(bits).sample(rng);
    std::uint32_t prime = 0;
    for (int i = 0; i < m; ++i) {
      const EdgeId e = spec.active[i];
      const double eta = field.eta[e];
      if (uniform01(rng) < conditional_kappa_given_eta(eta, p, q)) prime |= 1u << i;
      if (e == bin_edge) {
        eta2.push_back(eta * eta);
        hard.push_back(static_cast<std::uint8_t>((bits >> i) & 1u));
      }
      m2[i] += eta * eta;
      m4[i] += eta * eta * eta * eta;
    }
    ++count_kappa[bits];
    ++count_prime[prime];
  }

  RoundtripReport rep;
  rep.p = p;
  rep.q = q;
  rep.samples = samples;
  rep.thinning = thinning;
  rep.seed = seed;
  rep.bin_edge = bin_edge;
  const double N = static_cast<double>(samples);
  for (std::uint32_t b = 0; b < exact.size(); ++b) {
    rep.tv_kappa += std::abs(count_kappa[b] / N - exact.probability(b));
    rep.tv_kappa_prime += std::abs(count_prime[b] / N - exact.probability(b));
  }
  rep.tv_kappa *= 0.5;
  rep.tv_kappa_prime *= 0.5;

  std::vector<double> sorted = eta2;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges_q(num_bins + 1);
  edges_q.front() = 0.0;
  edges_q.back() = std::numeric_limits<double>::infinity();
  for (int k = 1; k < num_bins; ++k) edges_q[k] = sorted[sorted.size() * k / num_bins];
  rep.bins.resize(num_bins);
  std::vector<double> formula_sum(num_bins, 0.0);
  for (size_t i = 0; i < eta2.size(); ++i) {
    const int k = static_cast<int>(std::upper_bound(edges_q.begin() + 1, edges_q.end() - 1, eta2[i]) -
                                   (edges_q.begin() + 1));
    RoundtripBin& bin = rep.bins[k];
    ++bin.hits;
    bin.hard += hard[i];
    formula_sum[k] += conditional_kappa_given_eta(std::sqrt(eta2[i]), p, q);
  }
  const double z = 1.959963984540054;
  for (int k = 0; k < num_bins; ++k) {
    RoundtripBin& bin = rep.bins[k];
    bin.eta2_low = edges_q[k];
    bin.eta2_high = k + 1 < num_bins ? edges_q[k + 1] : sorted.back();
    if (bin.hits == 0) continue;
    const double n = static_cast<double>(bin.hits);
    bin.empirical = bin.hard / n;
    bin.formula = formula_sum[k] / n;
    const double denom = 1.0 + z * z / n;
    const double centre = (bin.empirical + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(bin.empirical * (1.0 - bin.empirical) / n + z * z / (4.0 * n * n)) / denom;
    bin.ci_low = centre - half;
    bin.ci_high = centre + half;
    bin.checked = bin.hits >= 100;
    bin.within = !bin.checked || (bin.formula >= bin.ci_low && bin.formula <= bin.ci_high);
  }

  for (int i = 0; i < m; ++i) {
    const EdgeId e = spec.active[i];
    VarianceCheck vc;
    vc.edge = e;
    vc.sample = m2[i] / N;
    const double fourth = m4[i] / N;
    vc.stderr = std::sqrt(std::max(0.0, fourth - vc.sample * vc.sample) / N);
    for (std::uint32_t b = 0; b < exact.size(); ++b) vc.exact += exact.probability(b) * sampler_for(b).covariance(e, e);
    vc.z = vc.stderr > 0.0 ? (vc.sample - vc.exact) / vc.stderr : 0.0;
    rep.variances.push_back(vc);
  }
  return rep;
}

}  // namespace detcond
