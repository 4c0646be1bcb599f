#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "detcond/graph.hpp"
#include "detcond/laplacian.hpp"

namespace detcond {

/// Configurations at which the interdependence bound is evaluated.
/// all: every kappa (boxes with at most 20 edges); extremal: all-soft and
/// all-hard; random: `samples` configurations with iid fair edges.
enum class ProbeStrategy { all, extremal, random };

std::string to_string(ProbeStrategy s);
ProbeStrategy parse_probe_strategy(const std::string& s);

/// Lattice position of every edge of a free or wired box: tail site and
/// direction of the bond from x to x + e_i.
struct LatticeBond {
  Point tail;
  int direction = 0;
};

class LatticeIndex {
 public:
  explicit LatticeIndex(const FiniteGraph& box);
  /// Edge of the box for the bond x -> x + e_i with its oriented endpoints.
  std::optional<LatticeEdge> find(const Point& x, int direction) const;
  const LatticeBond& bond(EdgeId e) const { return bonds_.at(e); }
  int radius() const { return radius_; }

 private:
  const FiniteGraph* box_;
  FiniteGraph free_box_;
  int radius_;
  std::vector<EdgeId> from_free_;
  std::vector<LatticeBond> bonds_;
  std::optional<VertexId> merged_;
};

struct DobrushinEntry {
  EdgeId edge = 0;
  LatticeBond bond;
  double value = 0.0;
};

struct DobrushinReport {
  int dimension = 0;
  int radius = 0;
  bool wired = false;
  double p = 0.0, q = 0.0;
  EdgeId f = 0;
  ProbeStrategy probes = ProbeStrategy::extremal;
  long configurations = 0;
  std::uint64_t seed = 0;
  /// One entry per edge g != f: max over probes of p(1-p)(q-1)^2 I_f(g) I_g(f).
  std::vector<DobrushinEntry> entries;
  double row_sum = 0.0;
  /// True only when every configuration of the box was probed.
  bool certified = false;
  /// Entry for the bond x -> x + e_i, if the box has it.
  std::optional<double> entry_at(const Point& x, int direction) const;
  nlohmann::json to_json() const;
};

/// Interdependence bounds C_fg for the edge f of a box (pinned at the first
/// boundary vertex, or vertex 0). One Laplacian solve per probe.
DobrushinReport dobrushin_bound(const FiniteGraph& box, double p, double q, EdgeId f, ProbeStrategy probes,
                                long samples = 0, std::uint64_t seed = 1);

enum class KappaStrategy { all_soft, all_hard, random };
std::string to_string(KappaStrategy s);
KappaStrategy parse_kappa_strategy(const std::string& s);

struct DecayRow {
  int r = 0;
  double mean_abs = 0.0;
};

struct DecayFit {
  int dimension = 0;
  int radius = 0;
  double q = 1.0;
  KappaStrategy kappa = KappaStrategy::all_soft;
  int samples = 1;
  std::uint64_t seed = 0;
  std::vector<DecayRow> rows;
  /// Least-squares slope of -ln mean_abs against ln r.
  double exponent = 0.0;
  double exponent_stderr = 0.0;
  double residual_rms = 0.0;
  nlohmann::json to_json() const;
};

/// Mean over sites y with |y|_inf = r and directions j of
/// |(grad_{e_1} grad_{e_j} G)(0, y)| on the wired box of the given radius,
/// for r_min <= r <= r_max, followed by a log-log fit. Averages over
/// `samples` configurations for random kappa (iid fair edges). Throws
/// std::invalid_argument when r_max < 10 r_min or r_max >= radius.
DecayFit green_decay_fit(int dimension, int radius, double q, KappaStrategy kappa, int r_min, int r_max,
                         int samples = 1, std::uint64_t seed = 1);

/// CSV with header r,mean_abs_grad2_G,fit_exponent; the global exponent is
/// repeated on every row.
void write_decay_csv(std::ostream& out, const DecayFit& fit);

}  // namespace detcond
