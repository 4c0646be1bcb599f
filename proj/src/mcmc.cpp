#include "detcond/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace detcond {

namespace {

constexpr char kMagic[4] = {'D', 'C', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  template <class T>
  void put(const T& x) {
    const char* p = reinterpret_cast<const char*>(&x);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void bytes(const void* p, std::size_t n) {
    const char* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  std::vector<char>& buffer() { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(const std::vector<char>& b, std::size_t end) : buf_(b), end_(end) {}
  template <class T>
  T get() {
    T x;
    need(sizeof(T));
    std::memcpy(&x, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return x;
  }
  void bytes(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return end_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw CheckpointError("checkpoint truncated");
  }
  const std::vector<char>& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

Configuration initial_configuration(const MeasureSpec& spec, StartState start) {
  if (start == StartState::automatic) start = spec.bc == Boundary::wired ? StartState::all_hard : StartState::all_soft;
  Configuration k = spec.frozen;
  for (EdgeId e : spec.active) k[e] = start == StartState::all_hard ? 1 : 0;
  return k;
}

double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

nlohmann::json summary_json(const ChainSummary& s) {
  return {{"sweeps", s.sweeps},       {"samples", s.samples},     {"marginal", s.marginal},
          {"stderr", s.marginal_stderr}, {"h_density", s.h_density}, {"h_stderr", s.h_stderr},
          {"tau_int", s.tau_int}};
}

}  // namespace

double integrated_autocorrelation(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 4) return 0.5;
  const double m = mean(series);
  double c0 = 0.0;
  for (double v : series) c0 += (v - m) * (v - m);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return 0.5;
  double tau = 0.5;
  for (std::size_t t = 1; t < n / 2; ++t) {
    double ct = 0.0;
    for (std::size_t i = 0; i + t < n; ++i) ct += (series[i] - m) * (series[i + t] - m);
    tau += ct / static_cast<double>(n) / c0;
    if (static_cast<double>(t) >= 6.0 * tau) break;
  }
  return std::max(tau, 0.5);
}

Chain::Chain(MeasureSpec spec, ChainSettings settings)
    : spec_(std::move(spec)),
      settings_(settings),
      lap_(spec_.graph, Conductances(spec_.q, initial_configuration(spec_, settings.start))),
      rng_(settings.seed) {
  if (settings_.observed_edge && (*settings_.observed_edge < 0 || *settings_.observed_edge >= spec_.graph->num_edges()))
    throw std::invalid_argument("observed edge out of range");
}

double Chain::hard_probability(EdgeId f) const {
  // R_eff with f at its current conductance c, then with f soft:
  // 1/R_1 = 1/R_c + 1 - c.
  const double c = lap_.conductances().value(f);
  const double rc = lap_.resistance(f);
  const double r1 = rc / (1.0 + (1.0 - c) * rc);
  return detcond::hard_probability(spec_.p, spec_.q, r1);
}

bool Chain::update(EdgeId f, double u) {
  const bool hard = u < hard_probability(f);
  lap_.set_edge(f, hard);
  return hard;
}

void Chain::sweep(const std::function<void(EdgeId)>& after_update) {
  for (EdgeId f : spec_.active) {
    update(f, uniform01(rng_));
    if (after_update) after_update(f);
  }
  end_sweep();
}

void Chain::end_sweep() {
  ++sweep_;
  if (sweep_ > settings_.burnin) record();
}

void Chain::run(long sweeps) {
  for (long i = 0; i < sweeps; ++i) sweep();
}

int Chain::hard_count() const { return count_hard(kappa(), spec_.active); }

void Chain::record() {
  h_series_.push_back(spec_.num_active() == 0 ? 0.0 : static_cast<double>(hard_count()) / spec_.num_active());
  if (settings_.observed_edge) edge_series_.push_back(kappa()[*settings_.observed_edge] ? 1.0 : 0.0);
}

ChainSummary Chain::summary() const {
  ChainSummary s;
  s.sweeps = sweep_;
  s.samples = static_cast<long>(h_series_.size());
  if (h_series_.empty()) return s;
  s.tau_int = integrated_autocorrelation(h_series_);
  const double n = static_cast<double>(h_series_.size());
  s.h_density = mean(h_series_);
  s.h_stderr = std::sqrt(variance(h_series_) * 2.0 * s.tau_int / n);
  if (!edge_series_.empty()) {
    s.marginal = mean(edge_series_);
    s.marginal_stderr = std::sqrt(variance(edge_series_) * 2.0 * s.tau_int / n);
  }
  return s;
}

std::vector<char> Chain::checkpoint() {
  lap_.refactorize();
  Writer w;
  w.bytes(kMagic, 4);
  w.put(kVersion);
  w.put(spec_.graph->hash());
  w.put(spec_.p);
  w.put(spec_.q);
  w.put(static_cast<std::uint32_t>(spec_.num_active()));
  w.put(settings_.seed);
  w.put(static_cast<std::int64_t>(settings_.burnin));
  w.put(static_cast<std::int32_t>(settings_.observed_edge.value_or(-1)));
  w.put(static_cast<std::int64_t>(sweep_));
  std::ostringstream rng_text;
  rng_text << rng_;
  const std::string rs = rng_text.str();
  w.put(static_cast<std::uint32_t>(rs.size()));
  w.bytes(rs.data(), rs.size());
  const Configuration& k = kappa();
  w.put(static_cast<std::uint32_t>(k.size()));
  w.bytes(k.data(), k.size());
  w.put(static_cast<std::uint64_t>(h_series_.size()));
  w.bytes(h_series_.data(), h_series_.size() * sizeof(double));
  w.put(static_cast<std::uint64_t>(edge_series_.size()));
  w.bytes(edge_series_.data(), edge_series_.size() * sizeof(double));
  auto& buf = w.buffer();
  const std::uint64_t sum = fnv1a(buf.data(), buf.size());
  w.put(sum);
  return buf;
}

Chain Chain::restore(MeasureSpec spec, const std::vector<char>& blob) {
  if (blob.size() < 4 + sizeof(std::uint64_t)) throw CheckpointError("checkpoint truncated");
  const std::size_t body = blob.size() - sizeof(std::uint64_t);
  std::uint64_t stored;
  std::memcpy(&stored, blob.data() + body, sizeof(stored));
  if (stored != fnv1a(blob.data(), body)) throw CheckpointError("checkpoint checksum mismatch");
  if (std::memcmp(blob.data(), kMagic, 4) != 0) throw CheckpointError("not a chain checkpoint");

  Reader r(blob, body);
  char magic[4];
  r.bytes(magic, 4);
  if (r.get<std::uint32_t>() != kVersion) throw CheckpointError("unsupported checkpoint version");
  if (r.get<std::uint64_t>() != spec.graph->hash()) throw CheckpointError("checkpoint was written for another graph");
  const double p = r.get<double>(), q = r.get<double>();
  if (p != spec.p || q != spec.q) throw CheckpointError("checkpoint parameters differ from the requested measure");
  if (r.get<std::uint32_t>() != static_cast<std::uint32_t>(spec.num_active()))
    throw CheckpointError("checkpoint active edge count differs");

  ChainSettings settings;
  settings.seed = r.get<std::uint64_t>();
  settings.burnin = static_cast<long>(r.get<std::int64_t>());
  const std::int32_t observed = r.get<std::int32_t>();
  if (observed >= 0) settings.observed_edge = observed;
  const long sweep = static_cast<long>(r.get<std::int64_t>());

  std::string rs(r.get<std::uint32_t>(), '\0');
  r.bytes(rs.data(), rs.size());
  Configuration k(r.get<std::uint32_t>());
  if (static_cast<int>(k.size()) != spec.graph->num_edges()) throw CheckpointError("configuration length mismatch");
  r.bytes(k.data(), k.size());
  for (auto x : k)
    if (x > 1) throw CheckpointError("configuration entry out of range");
  for (EdgeId e = 0; e < spec.graph->num_edges(); ++e) {
    if (std::find(spec.active.begin(), spec.active.end(), e) == spec.active.end() && k[e] != spec.frozen[e])
      throw CheckpointError("checkpoint disagrees with the frozen exterior");
  }

  Chain c(std::move(spec), settings);
  std::istringstream rng_text(rs);
  rng_text >> c.rng_;
  if (rng_text.fail()) throw CheckpointError("corrupt RNG state");
  for (EdgeId e = 0; e < static_cast<EdgeId>(k.size()); ++e) c.lap_.set_edge(e, k[e] != 0);
  c.lap_.refactorize();
  c.sweep_ = sweep;

  const auto nh = r.get<std::uint64_t>();
  if (nh * sizeof(double) > r.remaining()) throw CheckpointError("checkpoint truncated");
  c.h_series_.resize(nh);
  r.bytes(c.h_series_.data(), nh * sizeof(double));
  const auto ne = r.get<std::uint64_t>();
  if (ne * sizeof(double) > r.remaining()) throw CheckpointError("checkpoint truncated");
  c.edge_series_.resize(ne);
  r.bytes(c.edge_series_.data(), ne * sizeof(double));
  if (r.remaining() != 0) throw CheckpointError("trailing bytes in checkpoint");
  return c;
}

nlohmann::json Chain::to_json() const {
  std::ostringstream rng_text;
  rng_text << rng_;
  std::string bits;
  for (auto x : kappa()) bits.push_back(x ? '1' : '0');
  nlohmann::json j;
  j["format_version"] = kVersion;
  j["graph_hash"] = spec_.graph->hash();
  j["p"] = spec_.p;
  j["q"] = spec_.q;
  j["seed"] = settings_.seed;
  j["burnin"] = settings_.burnin;
  j["observed_edge"] = settings_.observed_edge ? nlohmann::json(*settings_.observed_edge) : nlohmann::json(nullptr);
  j["sweep"] = sweep_;
  j["rng_state"] = rng_text.str();
  j["kappa"] = bits;
  j["summary"] = summary_json(summary());
  return j;
}

void Chain::save(const std::string& path) {
  const auto blob = checkpoint();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    out.flush();
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Chain Chain::load(MeasureSpec spec, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint " + path);
  std::vector<char> blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return restore(std::move(spec), blob);
}

nlohmann::json CouplingReport::to_json() const {
  return {{"sweeps", sweeps},
          {"updates", updates},
          {"violations", violations},
          {"first_violation_sweep", first_violation_sweep},
          {"agreeing_sweeps", agreeing_sweeps},
          {"lower", summary_json(lower)},
          {"upper", summary_json(upper)}};
}

CouplingReport run_coupled(const MeasureSpec& lower, const MeasureSpec& upper, const CouplingOptions& options) {
  std::map<EdgeId, EdgeId> lower_keys, upper_keys;
  for (EdgeId e : lower.active) lower_keys[lower.graph->source_edge(e)] = e;
  for (EdgeId e : upper.active) upper_keys[upper.graph->source_edge(e)] = e;
  std::vector<EdgeId> keys;
  std::vector<EdgeId> shared;
  for (const auto& [k, e] : lower_keys) {
    keys.push_back(k);
    if (upper_keys.count(k)) shared.push_back(k);
  }
  for (const auto& [k, e] : upper_keys)
    if (!lower_keys.count(k)) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  const bool nested = shared.size() == lower_keys.size() || shared.size() == upper_keys.size();
  if (shared.empty() || !nested) throw std::invalid_argument("coupled measures need nested active edge sets");

  auto settings_for = [&](const std::map<EdgeId, EdgeId>& m, StartState start) {
    ChainSettings s;
    s.seed = options.seed;
    s.burnin = options.burnin;
    s.start = start;
    if (options.observed_key) {
      auto it = m.find(*options.observed_key);
      if (it == m.end()) throw std::invalid_argument("observed key is not a shared edge");
      s.observed_edge = it->second;
    }
    return s;
  };
  Chain lo(lower, settings_for(lower_keys, options.lower_start));
  Chain hi(upper, settings_for(upper_keys, options.upper_start));

  Rng rng(options.seed);
  CouplingReport rep;
  for (long s = 0; s < options.sweeps; ++s) {
    for (EdgeId k : keys) {
      const double u = uniform01(rng);
      const auto a = lower_keys.find(k);
      const auto b = upper_keys.find(k);
      bool la = false, hb = false;
      if (a != lower_keys.end()) la = lo.update(a->second, u);
      if (b != upper_keys.end()) hb = hi.update(b->second, u);
      if (a != lower_keys.end() && b != upper_keys.end()) {
        ++rep.updates;
        if (la && !hb) {
          ++rep.violations;
          if (rep.first_violation_sweep < 0) rep.first_violation_sweep = s;
        }
      }
    }
    bool agree = true;
    for (EdgeId k : shared)
      if (lo.kappa()[lower_keys[k]] != hi.kappa()[upper_keys[k]]) {
        agree = false;
        break;
      }
    if (agree) ++rep.agreeing_sweeps;
    lo.end_sweep();
    hi.end_sweep();
  }
  rep.sweeps = options.sweeps;
  rep.lower = lo.summary();
  rep.upper = hi.summary();
  return rep;
}

}  // namespace detcond
