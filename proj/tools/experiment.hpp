#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "detcond/mcmc.hpp"
#include "detcond/model.hpp"

namespace detcond::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitSizeCap = 2;
inline constexpr int kExitCheckpoint = 3;
inline constexpr int kExitHalted = 4;
inline constexpr int kExitViolation = 5;

inline constexpr int kSweepCsvVersion = 1;
inline constexpr int kSummaryJsonVersion = 1;
inline constexpr int kCellCsvVersion = 1;

/// Bad configuration or flags (exit 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key = value text; values may be comma-separated lists, optionally
/// in brackets. '#' starts a comment.
using ConfigMap = std::map<std::string, std::vector<std::string>>;
ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config(const std::string& path);

/// "p_sd" means the self-dual point of q; anything else is a number.
double parse_p(const std::string& token, double q);
double parse_number(const std::string& token);
std::uint64_t parse_seed(const std::string& token);

struct Cell {
  int index = 0;
  std::string graph;  // empty for boxes
  int n = 0;
  double p = 0.0;
  double q = 1.0;
  Boundary bc = Boundary::free;
  std::uint64_t seed = 0;
  std::uint64_t chain_seed = 0;
};

struct SweepConfig {
  std::string graph;
  std::vector<int> n;
  std::vector<std::string> p;
  std::vector<double> q;
  std::vector<Boundary> bc;
  std::vector<std::uint64_t> seeds;
  long sweeps = 1000;
  long burnin = 1000;
  long checkpoint_every = 1000;
  std::string out = "sweep_out";

  /// Keys: graph, n, p, q, bc, seed, sweeps, burnin, checkpoint_every, out.
  static SweepConfig from_map(const ConfigMap& m);
  /// Cells in canonical order (n, p, q, bc, seed); a cell repeated by the
  /// grid (p_sd equal to a listed p) appears once. Throws ConfigError on a
  /// repeated seed or colliding chain seeds.
  std::vector<Cell> cells() const;
  nlohmann::json to_json() const;
};

/// Chain seed of a cell: the user seed mixed with the cell parameters.
std::uint64_t cell_chain_seed(const Cell& c);

MeasureSpec cell_spec(const Cell& c);
ChainSettings cell_settings(const Cell& c, const MeasureSpec& spec, long burnin);

struct CellResult {
  Cell cell;
  long sweeps = 0;
  ChainSummary summary;
  bool halted = false;
};

/// Header n,p,q,bc,seed,sweeps,marginal,stderr,h_density,tau_int.
std::string sweep_csv_header();
std::string sweep_csv_row(const CellResult& r);

struct SweepOptions {
  bool resume = false;
  /// Stop every unfinished cell after this many sweeps in this run.
  std::optional<long> halt_after;
};

struct SweepOutcome {
  std::vector<CellResult> results;
  bool halted = false;
};

/// Runs every cell in parallel, checkpointing each chain every
/// checkpoint_every sweeps under out/checkpoints. Finished cells write
/// out/cells/cell_<i>.csv; when all cells finish, writes out/sweep.csv,
/// out/summary.json and out/manifest.json. Throws CheckpointError on a
/// corrupt checkpoint.
SweepOutcome run_sweep(const SweepConfig& config, const SweepOptions& options);

/// Writes text to path through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& text);

/// Pairs free and wired rows of a merged sweep.csv with equal n, p, q and
/// seed; flags pairs with wired < free.
nlohmann::json sweep_report(const std::string& sweep_csv_path);

}  // namespace detcond::cli
