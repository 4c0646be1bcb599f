#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <vector>

#include <json.hpp>

#include "detcond/contour.hpp"
#include "detcond/graph.hpp"
#include "detcond/model.hpp"
#include "detcond/planar.hpp"

namespace detcond {

/// Primal plane graph and its dual. Edge e of the primal corresponds to
/// edge e of the dual.
struct DualMap {
  std::shared_ptr<const FiniteGraph> primal;
  std::shared_ptr<const FiniteGraph> dual;
};

DualMap make_dual_map(std::shared_ptr<const FiniteGraph> g);

/// kappa*_{e*} = 1 + q - kappa_e: hard and soft swap.
Configuration dual_configuration(const DualMap& dm, const Configuration& kappa);

/// Total variation between the pushforward of P^{G,p} under the dual map and
/// P^{G*,p*}, both computed exactly.
double check_duality_pushforward(const FiniteGraph& g, double p, double q);

/// Box edges a contour constrains: crossed bonds must be soft, the faces of
/// plaquettes around contour vertices that lie in E(int) must be hard.
struct ContourFootprint {
  std::vector<EdgeId> soft;
  std::vector<EdgeId> hard;
};

/// Throws GraphError when the contour leaves the box.
ContourFootprint contour_footprint(const FiniteGraph& box, const Contour& c);
bool is_q_contour(const ContourFootprint& fp, const Configuration& kappa);
bool is_q_contour(const FiniteGraph& box, const Contour& c, const Configuration& kappa);

/// (4 q^{-1/8})^length q^{1/2}.
double peierls_bound(int length, double q);
/// sum over lengths of N(length) * peierls_bound(length, q).
double contour_sum_bound(const std::map<int, int>& counts_by_length, double q);
/// Probability of the footprint under Bernoulli(p) edges (the q = 1 measure).
double product_frequency(const ContourFootprint& fp, double p);

struct ContourFrequency {
  int length = 0;
  std::vector<DualSite> vertices;
  double frequency = 0.0;
  double stderr = 0.0;
  double bound = 0.0;
  bool exceeds = false;
};

struct ContourLengthClass {
  int length = 0;
  int count = 0;
  double frequency = 0.0;      // mean over the contours of this length
  double max_frequency = 0.0;
  double bound = 0.0;
  bool vacuous = false;
};

struct ContourReport {
  int n = 0;
  double p = 0.0, q = 0.0;
  int max_len = 0;
  long sweeps = 0;
  std::uint64_t seed = 0;
  std::vector<ContourFrequency> contours;
  std::vector<ContourLengthClass> classes;
  double explicit_sum_bound = 0.0;
  bool any_exceeds = false;
  /// JSON array of {length, count, frequency, bound, vacuous}.
  nlohmann::json classes_json() const;
  nlohmann::json to_json() const;
};

/// MCMC frequencies of each contour around the central edge of the free box
/// Lambda_n being a q-contour, paired with the Peierls bound. A contour is
/// flagged when its frequency exceeds a non-vacuous bound by more than 3
/// standard errors.
ContourReport estimate_contour_frequency(int n, double p, double q, int max_len, long sweeps, long burnin,
                                         std::uint64_t seed);

struct GapRow {
  int n = 0;
  double p = 0.0, q = 0.0;
  Boundary bc = Boundary::free;
  EdgeId edge = 0;
  double estimate = 0.0;
  double stderr = 0.0;
  long sweeps = 0;
  std::uint64_t seed = 0;
};

struct GapReport {
  std::vector<GapRow> rows;
  double free_mean = 0.0, free_stderr = 0.0;
  double wired_mean = 0.0, wired_stderr = 0.0;
  double gap = 0.0, gap_stderr = 0.0;
  /// free_mean + wired_mean (tends to 1 by duality).
  double sum = 0.0;
  nlohmann::json to_json() const;
};

/// Free and wired central-edge hard marginals on Lambda_n (d = 2) at p, one
/// chain per seed and boundary condition. Errors combine seeds (standard
/// error of the seed means) when there are at least two seeds.
GapReport free_wired_gap(int n, double p, double q, long sweeps, long burnin, const std::vector<std::uint64_t>& seeds);

/// CSV header n,p,q,bc,edge,estimate,stderr,sweeps,seed.
void write_gap_csv(std::ostream& out, const std::vector<GapRow>& rows);

}  // namespace detcond
