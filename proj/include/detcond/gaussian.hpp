#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

#include "detcond/graph.hpp"
#include "detcond/laplacian.hpp"
#include "detcond/random.hpp"

namespace detcond {

/// V_{p,q}(x) = -ln(p e^{-q x^2/2} + (1-p) e^{-x^2/2}).
double potential(double x, double p, double q);

/// P(kappa_e = q | eta_e) = p e^{-q eta^2/2} / (p e^{-q eta^2/2} + (1-p) e^{-eta^2/2}).
double conditional_kappa_given_eta(double eta, double p, double q);

/// Gradient per edge, eta_e = phi(head) - phi(tail) with edges oriented from
/// the smaller to the larger vertex id (lexicographic order on box sites).
struct GradientField {
  std::vector<double> eta;
  std::vector<double> phi;
};

/// eta along the lattice direction from x to x + e_i; 0 for a bond joining
/// two wired boundary sites.
double lattice_gradient(const FiniteGraph& box, const GradientField& field, const Point& x, int direction);

/// One side of a plaquette traversed counterclockwise: eta of `edge` times
/// `sign`; edge -1 for a bond joining two wired boundary sites.
struct PlaquetteSide {
  EdgeId edge = -1;
  int sign = 0;
};
using Plaquette = std::array<PlaquetteSide, 4>;

/// Plaquettes of a two-dimensional free or wired box.
std::vector<Plaquette> box_plaquettes(const FiniteGraph& box);

/// Largest |eta_12 + eta_23 + eta_34 + eta_41| over the plaquettes.
double plaquette_defect(const std::vector<Plaquette>& plaquettes, const GradientField& field);
double plaquette_defect(const FiniteGraph& box, const GradientField& field);

/// Centred Gaussian field with covariance the inverse Dirichlet Laplacian:
/// phi vanishes on the boundary vertices (vertex 0 when there are none).
class PinnedGaussianSampler {
 public:
  PinnedGaussianSampler(std::shared_ptr<const FiniteGraph> g, Conductances k);

  const FiniteGraph& graph() const { return *graph_; }
  const Conductances& conductances() const { return k_; }
  int unknowns() const { return static_cast<int>(interior_.size()); }

  GradientField sample(Rng& rng) const;
  std::vector<GradientField> sample(std::uint64_t seed, int count) const;
  /// Exact covariance of eta_f and eta_g.
  double covariance(EdgeId f, EdgeId g) const;
  /// Exact variance of phi(v).
  double vertex_variance(VertexId v) const;

 private:
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::VectorXd edge_vector(EdgeId f) const;

  std::shared_ptr<const FiniteGraph> graph_;
  Conductances k_;
  std::vector<VertexId> interior_;
  std::vector<int> index_;
  bool dense_ = true;
  Eigen::LLT<Eigen::MatrixXd> dense_llt_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> sparse_llt_;
};

/// Field samples as CSV rows edge_id,eta, one block per sample.
void write_field_csv(std::ostream& out, const std::vector<GradientField>& fields);

struct RoundtripBin {
  double eta2_low = 0.0;
  double eta2_high = 0.0;
  long hits = 0;
  long hard = 0;
  double empirical = 0.0;
  double formula = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool checked = false;
  bool within = true;
};

struct VarianceCheck {
  EdgeId edge = 0;
  double sample = 0.0;
  double exact = 0.0;
  double stderr = 0.0;
  double z = 0.0;
};

struct RoundtripReport {
  double p = 0.0, q = 0.0;
  long samples = 0;
  int thinning = 1;
  std::uint64_t seed = 0;
  EdgeId bin_edge = 0;
  /// TV of the kappa' histogram and of the kappa histogram to enumeration.
  double tv_kappa_prime = 0.0;
  double tv_kappa = 0.0;
  std::vector<RoundtripBin> bins;
  std::vector<VarianceCheck> variances;
  bool bins_ok() const;
  double max_variance_z() const;
  nlohmann::json to_json() const;
};

/// kappa ~ heat-bath chain (thinning sweeps apart), eta ~ Gaussian given
/// kappa, kappa' ~ conditional_kappa_given_eta. Requires at most 20 edges.
/// Bins are quantiles of eta^2 on the central edge (first active edge off
/// the lattice); a bin is checked when it has at least 100 hits, against a
/// 95% Wilson interval of the hard count of the original kappa. Variances of eta_f are compared to the exact mixture
/// sum_kappa P(kappa) Cov_kappa(eta_f, eta_f).
RoundtripReport two_layer_roundtrip(std::shared_ptr<const FiniteGraph> box, double p, double q, long samples,
                                    std::uint64_t seed, int thinning = 1, int num_bins = 5, long burnin = 1000);

}  // namespace detcond
