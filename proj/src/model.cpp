#include "detcond/model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "detcond/parallel.hpp"
#include "detcond/spanning_tree.hpp"

namespace detcond {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double bernoulli_part(double p, int h, int s) {
  double x = 0.0;
  if (h > 0) x += p == 0.0 ? kNegInf : h * std::log(p);
  if (s > 0) x += p == 1.0 ? kNegInf : s * std::log1p(-p);
  return x;
}

double log_sum_exp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

std::string to_string(Boundary bc) { return bc == Boundary::free ? "free" : "wired"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "free") return Boundary::free;
  if (s == "wired") return Boundary::wired;
  throw std::invalid_argument("boundary condition must be 'free' or 'wired', got '" + s + "'");
}

MeasureSpec MeasureSpec::full(std::shared_ptr<const FiniteGraph> g, double p, double q, Boundary bc) {
  MeasureSpec s;
  s.active.resize(g->num_edges());
  for (EdgeId e = 0; e < g->num_edges(); ++e) s.active[e] = e;
  s.frozen.assign(g->num_edges(), 0);
  s.graph = std::move(g);
  s.p = p;
  s.q = q;
  s.bc = bc;
  s.validate();
  return s;
}

MeasureSpec MeasureSpec::conditioned(std::shared_ptr<const FiniteGraph> g, double p, double q,
                                     std::vector<EdgeId> active, Configuration lambda) {
  MeasureSpec s;
  s.graph = std::move(g);
  s.p = p;
  s.q = q;
  s.active = std::move(active);
  s.frozen = std::move(lambda);
  s.validate();
  return s;
}

void MeasureSpec::validate() const {
  if (!graph) throw std::invalid_argument("measure needs a graph");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  if (!(q >= 1.0)) throw std::invalid_argument("q must be >= 1");
  if (static_cast<int>(frozen.size()) != graph->num_edges())
    throw std::invalid_argument("frozen configuration must cover every edge");
  for (auto x : frozen)
    if (x > 1) throw std::invalid_argument("configuration entries must be 0 (soft) or 1 (hard)");
  std::vector<char> seen(graph->num_edges(), 0);
  for (EdgeId e : active) {
    if (e < 0 || e >= graph->num_edges()) throw std::invalid_argument("active edge out of range");
    if (seen[e]++) throw std::invalid_argument("active edge listed twice");
  }
}

Configuration MeasureSpec::join(std::uint32_t bits) const {
  Configuration k = frozen;
  for (int i = 0; i < num_active(); ++i) k[active[i]] = (bits >> i) & 1u;
  return k;
}

std::uint32_t MeasureSpec::bits_of(const Configuration& kappa) const {
  std::uint32_t b = 0;
  for (int i = 0; i < num_active(); ++i)
    if (kappa[active[i]]) b |= 1u << i;
  return b;
}

int count_hard(const Configuration& kappa, const std::vector<EdgeId>& edges) {
  int h = 0;
  for (EdgeId e : edges) h += kappa[e];
  return h;
}

double log_weight(const MeasureSpec& spec, const Configuration& kappa) {
  const int h = count_hard(kappa, spec.active);
  const double b = bernoulli_part(spec.p, h, spec.num_active() - h);
  if (b == kNegInf) return b;
  return b - 0.5 * log_det_zero_mean(*spec.graph, Conductances(spec.q, kappa));
}

double hard_probability(double p, double q, double q_minus) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double qm = std::clamp(q_minus, 0.0, 1.0);
  return p / (p + (1.0 - p) * std::sqrt(1.0 + (q - 1.0) * qm));
}

ExactDistribution::ExactDistribution(MeasureSpec spec, std::vector<double> log_weights)
    : spec_(std::move(spec)), log_w_(std::move(log_weights)) {
  log_z_ = log_sum_exp(log_w_);
  probs_.resize(log_w_.size());
  for (size_t i = 0; i < log_w_.size(); ++i) probs_[i] = std::exp(log_w_[i] - log_z_);
}

double ExactDistribution::marginal(int active_index) const {
  double s = 0.0;
  for (std::uint32_t b = 0; b < probs_.size(); ++b)
    if (b >> active_index & 1u) s += probs_[b];
  return s;
}

double ExactDistribution::event_probability(const std::function<bool(std::uint32_t)>& event) const {
  double s = 0.0;
  for (std::uint32_t b = 0; b < probs_.size(); ++b)
    if (event(b)) s += probs_[b];
  return s;
}

std::vector<double> ExactDistribution::marginalize(const std::vector<int>& indices) const {
  std::vector<double> out(std::size_t{1} << indices.size(), 0.0);
  for (std::uint32_t b = 0; b < probs_.size(); ++b) {
    std::uint32_t m = 0;
    for (size_t j = 0; j < indices.size(); ++j)
      if (b >> indices[j] & 1u) m |= 1u << j;
    out[m] += probs_[b];
  }
  return out;
}

void ExactDistribution::write_csv(std::ostream& out) const {
  out << "config_bits,log_weight,probability\n";
  out << std::setprecision(17);
  for (std::uint32_t b = 0; b < probs_.size(); ++b) {
    for (int i = 0; i < num_active(); ++i) out << ((b >> i & 1u) ? '1' : '0');
    out << ',' << log_w_[b] << ',' << probs_[b] << '\n';
  }
}

ExactDistribution enumerate(const MeasureSpec& spec) {
  spec.validate();
  const int k = spec.num_active();
  if (k > kMaxEnumerationEdges) throw SizeCapError("exact enumeration is capped at 20 active edges");
  const std::size_t total = std::size_t{1} << k;
  std::vector<double> lw(total);
  const double log_v = std::log(static_cast<double>(spec.graph->num_vertices()));

  // Chunks fix the top bits; each walks a Gray code over the low bits so
  // every step changes one conductance.
  const int low = std::min(k, 12);
  const std::size_t chunks = total >> low;
  parallel_for(chunks, [&](std::size_t c) {
    const std::uint32_t base = static_cast<std::uint32_t>(c << low);
    LaplacianState lap(spec.graph, Conductances(spec.q, spec.join(base)));
    std::uint32_t prev_gray = 0;
    for (std::uint32_t i = 0; i < (1u << low); ++i) {
      const std::uint32_t gray = i ^ (i >> 1);
      if (i > 0) {
        const int bit = __builtin_ctz(gray ^ prev_gray);
        lap.flip_edge(spec.active[bit]);
      }
      prev_gray = gray;
      const std::uint32_t bits = base | gray;
      const int h = __builtin_popcount(bits);
      const double b = bernoulli_part(spec.p, h, k - h);
      lw[bits] = b == kNegInf ? b : b - 0.5 * (log_v + lap.log_det_pinned());
    }
  });
  return ExactDistribution(spec, std::move(lw));
}

double conditional_hard(const MeasureSpec& spec, const Configuration& kappa, EdgeId f) {
  Configuration minus = kappa;
  minus[f] = 0;
  const double r = effective_resistance(*spec.graph, Conductances(spec.q, minus).weights(), f);
  return hard_probability(spec.p, spec.q, r);
}

double specification_kernel(const MeasureSpec& spec, const std::function<bool(const Configuration&)>& event) {
  const ExactDistribution dist = enumerate(spec);
  double s = 0.0;
  for (std::uint32_t b = 0; b < dist.size(); ++b)
    if (dist.probability(b) > 0.0 && event(spec.join(b))) s += dist.probability(b);
  return s;
}

double dual_parameter(double p, double q) {
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  const double r = (1.0 - p) * std::sqrt(q) / p;
  return r / (1.0 + r);
}

double self_dual_point(double q) {
  const double s = std::pow(q, 0.25);
  return s / (1.0 + s);
}

}  // namespace detcond
