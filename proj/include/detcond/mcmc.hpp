#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "detcond/laplacian.hpp"
#include "detcond/model.hpp"
#include "detcond/random.hpp"

namespace detcond {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StartState { automatic, all_soft, all_hard };

struct ChainSettings {
  std::uint64_t seed = 1;
  long burnin = 1000;
  /// Edge whose hard indicator is recorded; none disables the observable.
  std::optional<EdgeId> observed_edge;
  /// automatic: all-soft for free boxes, all-hard for wired ones.
  StartState start = StartState::automatic;
};

struct ChainSummary {
  long sweeps = 0;
  long samples = 0;
  double marginal = 0.0;
  double marginal_stderr = 0.0;
  double h_density = 0.0;
  double h_stderr = 0.0;
  double tau_int = 0.5;
};

/// Integrated autocorrelation time with Sokal's automatic window (c = 6).
double integrated_autocorrelation(const std::vector<double>& series);

/// Heat-bath chain on the active edges of one measure, scanning them in
/// list order once per sweep.
class Chain {
 public:
  Chain(MeasureSpec spec, ChainSettings settings);

  const MeasureSpec& spec() const { return spec_; }
  const ChainSettings& settings() const { return settings_; }
  const Configuration& kappa() const { return lap_.conductances().hard; }
  const LaplacianState& laplacian() const { return lap_; }
  long sweeps_done() const { return sweep_; }
  Rng& rng() { return rng_; }

  /// P(kappa_f = q | rest) under the current configuration.
  double hard_probability(EdgeId f) const;
  /// Heat-bath update of f with the given uniform; returns the new state.
  bool update(EdgeId f, double u);
  /// One scan over the active edges with uniforms from the chain's RNG.
  /// Observables are recorded at the end of every sweep past burn-in.
  void sweep(const std::function<void(EdgeId)>& after_update = {});
  void run(long sweeps);
  /// Ends a sweep whose updates were applied through update() by a driver
  /// supplying its own uniforms (couplings).
  void end_sweep();

  int hard_count() const;
  const std::vector<double>& h_series() const { return h_series_; }
  const std::vector<double>& edge_series() const { return edge_series_; }
  ChainSummary summary() const;

  /// Versioned, checksummed binary blob. Refactorizes the Laplacian first so
  /// that the chain and any chain restored from the blob continue with
  /// bit-identical arithmetic.
  std::vector<char> checkpoint();
  /// Restores a chain for `spec`; throws CheckpointError on a corrupt blob,
  /// version mismatch, or a blob written for another graph or parameters.
  static Chain restore(MeasureSpec spec, const std::vector<char>& blob);
  nlohmann::json to_json() const;

  /// Atomic write: temp file then rename.
  void save(const std::string& path);
  static Chain load(MeasureSpec spec, const std::string& path);

 private:
  void record();

  MeasureSpec spec_;
  ChainSettings settings_;
  LaplacianState lap_;
  Rng rng_;
  long sweep_ = 0;
  std::vector<double> h_series_;
  std::vector<double> edge_series_;
};

struct CouplingOptions {
  std::uint64_t seed = 1;
  long sweeps = 1000;
  long burnin = 0;
  /// Source edge id of the observed edge (shared key of both chains).
  std::optional<EdgeId> observed_key;
  StartState lower_start = StartState::all_soft;
  StartState upper_start = StartState::all_hard;
};

struct CouplingReport {
  long sweeps = 0;
  long updates = 0;
  long violations = 0;
  long first_violation_sweep = -1;
  /// Sweeps at whose end both chains agree on every shared edge.
  long agreeing_sweeps = 0;
  ChainSummary lower;
  ChainSummary upper;
  nlohmann::json to_json() const;
};

/// Runs two chains with one shared uniform per (sweep, edge key), edge keys
/// being source edge ids so that a free box and its wired quotient share
/// them. Keys are processed in increasing order; each chain updates the
/// keys it owns. Records every update after which lower > upper on the
/// updated shared edge.
CouplingReport run_coupled(const MeasureSpec& lower, const MeasureSpec& upper, const CouplingOptions& options);

}  // namespace detcond
