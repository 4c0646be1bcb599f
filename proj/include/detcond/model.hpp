#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "detcond/graph.hpp"
#include "detcond/laplacian.hpp"

namespace detcond {

inline constexpr int kMaxEnumerationEdges = 20;

enum class Boundary { free, wired };
std::string to_string(Boundary bc);
Boundary parse_boundary(const std::string& s);

/// One finite-volume measure P^{G,E',lambda}: graph, p, q, active edges E'
/// and the frozen configuration lambda on the remaining edges.
struct MeasureSpec {
  std::shared_ptr<const FiniteGraph> graph;
  double p = 0.5;
  double q = 1.0;
  std::vector<EdgeId> active;
  /// Full-length configuration; entries on active edges are ignored.
  Configuration frozen;
  Boundary bc = Boundary::free;

  /// All edges active.
  static MeasureSpec full(std::shared_ptr<const FiniteGraph> g, double p, double q, Boundary bc = Boundary::free);
  /// Active set E' with exterior lambda.
  static MeasureSpec conditioned(std::shared_ptr<const FiniteGraph> g, double p, double q,
                                 std::vector<EdgeId> active, Configuration lambda);

  int num_active() const { return static_cast<int>(active.size()); }
  /// Full configuration from bits over the active list (bit i = active[i]).
  Configuration join(std::uint32_t bits) const;
  std::uint32_t bits_of(const Configuration& kappa) const;
  void validate() const;
};

/// h ln p + s ln(1-p) - 1/2 ln det Delta_kappa, with h, s counted on the
/// active edges. -inf off the support when p is 0 or 1.
double log_weight(const MeasureSpec& spec, const Configuration& kappa);

/// Heat-bath probability p / (p + (1-p) sqrt(1 + (q-1) Q)).
double hard_probability(double p, double q, double q_minus);

class ExactDistribution {
 public:
  ExactDistribution(MeasureSpec spec, std::vector<double> log_weights);

  const MeasureSpec& spec() const { return spec_; }
  int num_active() const { return spec_.num_active(); }
  std::size_t size() const { return probs_.size(); }
  double log_normalization() const { return log_z_; }
  double log_weight(std::uint32_t bits) const { return log_w_[bits]; }
  double probability(std::uint32_t bits) const { return probs_[bits]; }
  const std::vector<double>& probabilities() const { return probs_; }
  const std::vector<double>& log_weights() const { return log_w_; }

  /// P(kappa_{active[i]} = q).
  double marginal(int active_index) const;
  double event_probability(const std::function<bool(std::uint32_t)>& event) const;
  /// Distribution of the bits at the given active indices (bit j = indices[j]).
  std::vector<double> marginalize(const std::vector<int>& indices) const;

  /// CSV with columns config_bits,log_weight,probability.
  void write_csv(std::ostream& out) const;

 private:
  MeasureSpec spec_;
  std::vector<double> log_w_;
  std::vector<double> probs_;
  double log_z_ = 0.0;
};

/// Exact distribution over the active edges (at most 20).
ExactDistribution enumerate(const MeasureSpec& spec);

/// P(kappa_f = q | rest) from the transfer current on kappa with f soft.
double conditional_hard(const MeasureSpec& spec, const Configuration& kappa, EdgeId f);

/// gamma_{E'}(A, lambda): probability of the event A (on full configurations)
/// under the measure with the active set of `spec` and exterior spec.frozen.
double specification_kernel(const MeasureSpec& spec, const std::function<bool(const Configuration&)>& event);

/// p* with p*/(1-p*) = (1-p) sqrt(q) / p.
double dual_parameter(double p, double q);
/// q^{1/4} / (1 + q^{1/4}).
double self_dual_point(double q);

/// Number of hard edges among `edges`.
int count_hard(const Configuration& kappa, const std::vector<EdgeId>& edges);

}  // namespace detcond
