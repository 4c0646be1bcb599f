#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "detcond/graph.hpp"
#include "detcond/model.hpp"

namespace detcond {

inline constexpr double kAuditSlack = 1e-12;

/// Result of checking one inequality over many cases. Margins are
/// LHS - RHS in log space, oriented so that the inequality reads margin >= 0.
struct AuditReport {
  std::string id;
  std::string instance;
  long cases = 0;
  double worst_margin = 0.0;
  std::vector<std::string> violations;
  std::optional<std::uint64_t> seed;
  nlohmann::json details = nlohmann::json::object();

  void check(double margin, const std::string& where);
  bool ok() const { return violations.empty(); }
  /// {id, instance, cases, worst_margin, violations[]} plus seed/details when set.
  nlohmann::json to_json() const;
};

/// det(k++) det(k--) <= det(k+-) det(k-+) for every pair of edges and every
/// configuration of the other edges, with determinants from kirchhoff_sum.
AuditReport audit_two_edge_determinant(const FiniteGraph& g, double q, const std::string& instance);

/// FKG lattice condition P(a v b) P(a ^ b) >= P(a) P(b). Exhaustive over all
/// pairs when the active set has at most `exhaustive_limit` edges, otherwise
/// `random_pairs` seeded pairs.
AuditReport audit_fkg_lattice(const MeasureSpec& spec, const std::string& instance, std::uint64_t seed = 1,
                              long random_pairs = 100000, int exhaustive_limit = 6);
/// FKG check with both the exhaustive and the random-pair stage.
AuditReport audit_fkg_lattice_sampled(const MeasureSpec& spec, const std::string& instance, std::uint64_t seed,
                                      long random_pairs);

/// Single-edge and two-edge Holley conditions for mu1 (lower) and mu2
/// (upper), given as normalized log-probabilities over the same k bits, plus
/// the singleton domination mu2(bit e) >= mu1(bit e).
AuditReport audit_holley_pair(const std::vector<double>& log_mu1, const std::vector<double>& log_mu2, int k,
                              const std::string& instance);
/// Holley audit for two measures with the same number of active edges.
AuditReport audit_holley_pair(const MeasureSpec& lower, const MeasureSpec& upper, const std::string& instance);

/// Holley conditions for the free box Lambda_n (d = 2), marginalized on the
/// edges with an interior endpoint, against the wired box Lambda_n. Edges
/// are matched through source edge ids. Needs a free box with at most 20
/// edges (n = 1).
AuditReport audit_free_wired(int n, double p, double q);

/// Ratio det(k+)/det(k-) for edge f is largest on the subgraph, then the
/// graph, then the contraction G/F; checked for every configuration.
AuditReport audit_subgraph_contraction(const FiniteGraph& g, const std::vector<EdgeId>& subgraph_edges,
                                       const std::vector<EdgeId>& contracted, EdgeId f, double q,
                                       const std::string& instance);

struct BulkBoundaryRow {
  int n = 0;
  std::string method;
  double free_upper_p = 0.0;
  double wired_lower_p = 0.0;
  double difference = 0.0;
  double stderr = 0.0;
};

/// mu^0_{n,p'}(kappa_e = q) - mu^1_{n,p}(kappa_e = q) at the central edge
/// of Lambda_n (d = 2) for each n. Diagnostic only: nothing is asserted, the
/// report never has violations. Exact for boxes with at most 20 edges,
/// MCMC otherwise.
AuditReport audit_bulk_vs_boundary(double q, double p, double p_prime, const std::vector<int>& radii, long sweeps,
                                   std::uint64_t seed, std::vector<BulkBoundaryRow>* rows = nullptr);

/// Normalized log-probabilities of an exact distribution.
std::vector<double> log_probabilities(const ExactDistribution& d);

}  // namespace detcond
