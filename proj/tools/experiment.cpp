#include "experiment.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>

#include "detcond/laplacian.hpp"
#include "detcond/parallel.hpp"
#include "detcond/random.hpp"

namespace detcond::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

const std::vector<std::string>& require(const ConfigMap& m, const std::string& key) {
  const auto it = m.find(key);
  if (it == m.end() || it->second.empty()) throw ConfigError("config key '" + key + "' is empty");
  return it->second;
}

long parse_long(const std::string& token) {
  try {
    size_t used = 0;
    const long v = std::stol(token, &used);
    if (used != token.size()) throw ConfigError("not an integer: " + token);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("not an integer: " + token);
  }
}

std::string fmt(double x) {
  std::ostringstream o;
  o << std::setprecision(17) << x;
  return o.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json summary_to_json(const ChainSummary& s) {
  return {{"sweeps", s.sweeps},          {"samples", s.samples},     {"marginal", s.marginal},
          {"stderr", s.marginal_stderr}, {"h_density", s.h_density}, {"h_stderr", s.h_stderr},
          {"tau_int", s.tau_int}};
}

ChainSummary summary_from_json(const nlohmann::json& j) {
  ChainSummary s;
  s.sweeps = j.at("sweeps").get<long>();
  s.samples = j.at("samples").get<long>();
  s.marginal = j.at("marginal").get<double>();
  s.marginal_stderr = j.at("stderr").get<double>();
  s.h_density = j.at("h_density").get<double>();
  s.h_stderr = j.at("h_stderr").get<double>();
  s.tau_int = j.at("tau_int").get<double>();
  return s;
}

nlohmann::json cell_json(const CellResult& r) {
  return {{"index", r.cell.index},
          {"graph", r.cell.graph},
          {"n", r.cell.n},
          {"p", r.cell.p},
          {"q", r.cell.q},
          {"bc", to_string(r.cell.bc)},
          {"seed", r.cell.seed},
          {"chain_seed", r.cell.chain_seed},
          {"sweeps", r.sweeps},
          {"summary", summary_to_json(r.summary)}};
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (m.count(key)) throw ConfigError("config key '" + key + "' repeated");
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": unterminated list");
      value = value.substr(1, value.size() - 2);
    }
    std::vector<std::string> items;
    for (const auto& item : split(value, ',')) {
      const std::string t = unquote(trim(item));
      if (!t.empty()) items.push_back(t);
    }
    m[key] = items;
  }
  return m;
}

ConfigMap load_config(const std::string& path) { return parse_config_text(read_file(path)); }

double parse_number(const std::string& token) {
  try {
    size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw ConfigError("not a number: " + token);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("not a number: " + token);
  }
}

double parse_p(const std::string& token, double q) {
  if (token == "p_sd") return self_dual_point(q);
  const double p = parse_number(token);
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p must lie in [0,1]: " + token);
  return p;
}

std::uint64_t parse_seed(const std::string& token) {
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(token, &used);
    if (used != token.size() || token.front() == '-') throw ConfigError("not a seed: " + token);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("not a seed: " + token);
  }
}

SweepConfig SweepConfig::from_map(const ConfigMap& m) {
  static const std::set<std::string> known{"graph", "n",      "p",   "q", "bc", "seed", "sweeps", "burnin",
                                           "checkpoint_every", "out"};
  for (const auto& [k, v] : m)
    if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
  SweepConfig c;
  if (m.count("graph")) c.graph = require(m, "graph").front();
  if (m.count("n"))
    for (const auto& t : require(m, "n")) {
      const long n = parse_long(t);
      if (n < 1) throw ConfigError("box radius must be >= 1");
      c.n.push_back(static_cast<int>(n));
    }
  c.p = require(m, "p");
  for (const auto& t : require(m, "q")) {
    const double q = parse_number(t);
    if (!(q >= 1.0)) throw ConfigError("q must be >= 1: " + t);
    c.q.push_back(q);
  }
  for (const auto& t : c.p)
    for (double q : c.q) parse_p(t, q);
  if (m.count("bc")) {
    for (const auto& t : require(m, "bc")) {
      try {
        c.bc.push_back(parse_boundary(t));
      } catch (const std::exception&) {
        throw ConfigError("unknown boundary condition: " + t);
      }
    }
  } else {
    c.bc.push_back(Boundary::free);
  }
  for (const auto& t : require(m, "seed")) c.seeds.push_back(parse_seed(t));
  if (m.count("sweeps")) c.sweeps = parse_long(require(m, "sweeps").front());
  if (m.count("burnin")) c.burnin = parse_long(require(m, "burnin").front());
  if (m.count("checkpoint_every")) c.checkpoint_every = parse_long(require(m, "checkpoint_every").front());
  if (m.count("out")) c.out = require(m, "out").front();
  if (c.graph.empty() && c.n.empty()) throw ConfigError("config needs either graph or n");
  if (!c.graph.empty() && !c.n.empty()) throw ConfigError("config takes graph or n, not both");
  if (c.sweeps < 1 || c.burnin < 0 || c.checkpoint_every < 1) throw ConfigError("sweeps, burnin or checkpoint_every out of range");
  return c;
}

std::uint64_t cell_chain_seed(const Cell& c) {
  std::uint64_t s = mix_seed(static_cast<std::uint64_t>(c.n));
  s = mix_seed(s ^ std::bit_cast<std::uint64_t>(c.p));
  s = mix_seed(s ^ std::bit_cast<std::uint64_t>(c.q));
  s = mix_seed(s ^ (c.bc == Boundary::wired ? 1u : 0u));
  for (char ch : c.graph) s = mix_seed(s ^ static_cast<unsigned char>(ch));
  return derive_seed(c.seed, s);
}

std::vector<Cell> SweepConfig::cells() const {
  std::set<std::uint64_t> seen;
  for (auto s : seeds)
    if (!seen.insert(s).second) throw ConfigError("seed collision: seed " + std::to_string(s) + " listed twice");
  const std::vector<int> ns = graph.empty() ? n : std::vector<int>{0};
  std::vector<Cell> out;
  for (int nn : ns)
    for (const auto& pt : p)
      for (double qq : q)
        for (Boundary b : bc)
          for (auto s : seeds) {
            Cell c;
            c.graph = graph;
            c.n = nn;
            c.q = qq;
            c.p = parse_p(pt, qq);
            c.bc = b;
            c.seed = s;
            c.chain_seed = cell_chain_seed(c);
            const bool repeat = std::any_of(out.begin(), out.end(), [&](const Cell& o) {
              return o.n == c.n && o.p == c.p && o.q == c.q && o.bc == c.bc && o.seed == c.seed;
            });
            if (repeat) continue;
            c.index = static_cast<int>(out.size());
            out.push_back(c);
          }
  std::set<std::uint64_t> chain_seeds;
  for (const auto& c : out)
    if (!chain_seeds.insert(c.chain_seed).second)
      throw ConfigError("seed collision: two distinct cells derive the same chain seed");
  return out;
}

nlohmann::json SweepConfig::to_json() const {
  nlohmann::json bcs = nlohmann::json::array();
  for (auto b : bc) bcs.push_back(to_string(b));
  return {{"graph", graph}, {"n", n},           {"p", p},
          {"q", q},         {"bc", bcs},        {"seed", seeds},
          {"sweeps", sweeps}, {"burnin", burnin}, {"checkpoint_every", checkpoint_every},
          {"out", out}};
}

MeasureSpec cell_spec(const Cell& c) {
  std::shared_ptr<const FiniteGraph> g;
  if (c.graph.empty())
    g = std::make_shared<const FiniteGraph>(build_box(2, c.n, c.bc == Boundary::wired));
  else
    g = std::make_shared<const FiniteGraph>(load_graph(c.graph));
  return MeasureSpec::full(g, c.p, c.q, c.bc);
}

ChainSettings cell_settings(const Cell& c, const MeasureSpec& spec, long burnin) {
  ChainSettings s;
  s.seed = c.chain_seed;
  s.burnin = burnin;
  s.observed_edge = c.graph.empty() ? central_edge(*spec.graph) : 0;
  return s;
}

std::string sweep_csv_header() { return "n,p,q,bc,seed,sweeps,marginal,stderr,h_density,tau_int"; }

std::string sweep_csv_row(const CellResult& r) {
  std::ostringstream o;
  o << r.cell.n << ',' << fmt(r.cell.p) << ',' << fmt(r.cell.q) << ',' << to_string(r.cell.bc) << ',' << r.cell.seed
    << ',' << r.sweeps << ',' << fmt(r.summary.marginal) << ',' << fmt(r.summary.marginal_stderr) << ','
    << fmt(r.summary.h_density) << ',' << fmt(r.summary.tau_int);
  return o.str();
}

void write_file_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp);
  }
  fs::rename(tmp, path);
}

SweepOutcome run_sweep(const SweepConfig& config, const SweepOptions& options) {
  const std::vector<Cell> cells = config.cells();
  const fs::path out(config.out);
  fs::create_directories(out / "cells");
  fs::create_directories(out / "checkpoints");
  std::mutex writer;

  SweepOutcome outcome;
  outcome.results.resize(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const Cell& cell = cells[i];
    char name[32];
    std::snprintf(name, sizeof name, "cell_%04d", cell.index);
    const fs::path csv = out / "cells" / (std::string(name) + ".csv");
    const fs::path js = out / "cells" / (std::string(name) + ".json");
    const fs::path ckpt = out / "checkpoints" / (std::string(name) + ".ckpt");
    CellResult& res = outcome.results[i];
    res.cell = cell;

    if (options.resume && fs::exists(csv) && fs::exists(js)) {
      const auto j = nlohmann::json::parse(read_file(js.string()));
      res.sweeps = j.at("sweeps").get<long>();
      res.summary = summary_from_json(j.at("summary"));
      return;
    }
    MeasureSpec spec = cell_spec(cell);
    const ChainSettings settings = cell_settings(cell, spec, config.burnin);
    std::optional<Chain> chain;
    if (options.resume && fs::exists(ckpt)) {
      chain.emplace(Chain::load(spec, ckpt.string()));
      if (chain->settings().seed != settings.seed || chain->settings().burnin != settings.burnin)
        throw CheckpointError("checkpoint " + ckpt.string() + " belongs to another configuration");
    } else {
      std::error_code ec;
      fs::remove(ckpt, ec);
      chain.emplace(spec, settings);
    }
    const long target = config.burnin + config.sweeps;
    long here = 0;
    while (chain->sweeps_done() < target) {
      chain->sweep();
      ++here;
      if (chain->sweeps_done() % config.checkpoint_every == 0 && chain->sweeps_done() < target) {
        chain->save(ckpt.string());
        if (options.halt_after && here >= *options.halt_after) {
          res.halted = true;
          return;
        }
      }
    }
    res.sweeps = config.sweeps;
    res.summary = chain->summary();
    std::lock_guard<std::mutex> lock(writer);
    write_file_atomic(csv.string(), sweep_csv_header() + "\n" + sweep_csv_row(res) + "\n");
    write_file_atomic(js.string(), cell_json(res).dump(1) + "\n");
    std::error_code ec;
    fs::remove(ckpt, ec);
  });

  for (const auto& r : outcome.results) outcome.halted = outcome.halted || r.halted;
  if (outcome.halted) return outcome;

  std::string merged = sweep_csv_header() + "\n";
  nlohmann::json cells_json = nlohmann::json::array();
  for (const auto& r : outcome.results) {
    merged += sweep_csv_row(r) + "\n";
    cells_json.push_back(cell_json(r));
  }
  write_file_atomic((out / "sweep.csv").string(), merged);
  nlohmann::json summary{{"schema_version", kSummaryJsonVersion}, {"config", config.to_json()}, {"cells", cells_json}};
  write_file_atomic((out / "summary.json").string(), summary.dump(1) + "\n");
  nlohmann::json manifest{{"schema",
                           {{"sweep_csv", kSweepCsvVersion},
                            {"summary_json", kSummaryJsonVersion},
                            {"cell_csv", kCellCsvVersion},
                            {"checkpoint", 1}}},
                          {"sweep_csv_columns", split(sweep_csv_header(), ',')},
                          {"cells", cells.size()},
                          {"files", {"sweep.csv", "summary.json", "cells/"}}};
  write_file_atomic((out / "manifest.json").string(), manifest.dump(1) + "\n");
  return outcome;
}

nlohmann::json sweep_report(const std::string& sweep_csv_path) {
  std::istringstream in(read_file(sweep_csv_path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != sweep_csv_header())
    throw ConfigError(sweep_csv_path + " is not a sweep.csv file");
  struct Row {
    double marginal, stderr;
  };
  std::map<std::vector<std::string>, std::map<std::string, Row>> groups;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 10) throw ConfigError("malformed sweep.csv row: " + line);
    groups[{f[0], f[1], f[2], f[4]}][f[3]] = Row{parse_number(f[6]), parse_number(f[7])};
  }
  nlohmann::json pairs = nlohmann::json::array();
  long violations = 0;
  for (const auto& [key, rows] : groups) {
    if (!rows.count("free") || !rows.count("wired")) continue;
    const Row fr = rows.at("free"), wr = rows.at("wired");
    const bool ok = wr.marginal >= fr.marginal;
    if (!ok) ++violations;
    pairs.push_back({{"n", parse_long(key[0])},
                     {"p", parse_number(key[1])},
                     {"q", parse_number(key[2])},
                     {"seed", parse_seed(key[3])},
                     {"free", fr.marginal},
                     {"free_stderr", fr.stderr},
                     {"wired", wr.marginal},
                     {"wired_stderr", wr.stderr},
                     {"gap", wr.marginal - fr.marginal},
                     {"wired_ge_free", ok}});
  }
  return {{"pairs", pairs}, {"violations", violations}};
}

}  // namespace detcond::cli
