#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tmt/csv.hpp"
#include "tmt/distribution.hpp"
#include "tmt/error.hpp"
#include "tmt/model.hpp"

namespace tmt::traffic {

enum class Model { uniform, skewed };

inline std::string_view to_string(Model m) { return m == Model::uniform ? "uniform" : "skewed"; }

inline Model model_from_string(std::string_view s) {
  if (s == "uniform") return Model::uniform;
  if (s == "skewed") return Model::skewed;
  throw ValidationError("traffic.model", "expected 'uniform' or 'skewed', got '" + std::string(s) + "'");
}

/// U(x): every ToR sends at x*k*r to uniformly random other ToRs.
/// S_L(x): ceil(x*n) random ToRs are active, each sending at L*k*r to the
/// other active ToRs.
struct TrafficSpec {
  Model model = Model::uniform;
  double load_x = 0.5;
  double per_tor_rate_L = 1.0;  // skewed only
  FlowSizeDistribution distribution = FlowSizeDistribution::log_uniform(1e6, 64e6);
  double window_s = 1.0;
  std::uint64_t seed = 1;

  bool operator==(const TrafficSpec&) const = default;

  void check() const {
    if (!(load_x >= 0.0 && load_x <= 1.0)) throw ValidationError("traffic.load_x", "must lie in [0, 1]");
    if (model == Model::skewed && !(per_tor_rate_L > 0.0 && per_tor_rate_L <= 1.0))
      throw ValidationError("traffic.per_tor_rate_L", "must lie in (0, 1]");
    if (!(window_s > 0)) throw ValidationError("traffic.window_s", "must be > 0");
  }

  /// Expected bits/second offered by one active ToR.
  double per_tor_bps(const NetworkConfig& c) const {
    const double frac = model == Model::uniform ? load_x : per_tor_rate_L;
    return frac * c.k() * c.rate_bps;
  }
};

/// Active ToRs of the skewed model, sorted. All ToRs for the uniform model.
inline std::vector<TorId> active_tors(const TrafficSpec& spec, const NetworkConfig& c) {
  std::vector<TorId> all(c.n);
  std::iota(all.begin(), all.end(), 0);
  if (spec.model == Model::uniform) return all;
  const auto count = static_cast<int>(std::ceil(spec.load_x * c.n - 1e-12));
  if (count < 2)
    throw ValidationError("traffic.load_x", "skewed model needs at least 2 active ToRs, got " + std::to_string(count));
  std::seed_seq seq{spec.seed, std::uint64_t{0xAC71E}};
  std::mt19937_64 rng(seq);
  for (int i = 0; i < count; ++i) {
    auto j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(c.n - i));
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

/// Calls `sink(flow)` for every generated flow, source by source in
/// increasing arrival order per source. Each source has its own seeded
/// stream, so the trace does not depend on how callers consume it.
inline void for_each_flow(const TrafficSpec& spec, const NetworkConfig& c,
                          const std::function<void(const Flow&)>& sink) {
  spec.check();
  const double rate = spec.per_tor_bps(c);
  if (!(rate > 0)) return;
  const auto active = active_tors(spec, c);
  const double lambda = rate / spec.distribution.mean();
  for (TorId src : active) {
    std::seed_seq seq{spec.seed, static_cast<std::uint64_t>(src), std::uint64_t{0xF10E}};
    std::mt19937_64 rng(seq);
    double t = 0.0;
    for (;;) {
      t += -std::log1p(-uniform01(rng)) / lambda;
      if (t >= spec.window_s) break;
      Flow f;
      f.src = src;
      // Destination uniform over the other eligible ToRs.
      const auto others = static_cast<std::uint64_t>(active.size() - 1);
      auto pick = static_cast<std::size_t>(rng() % others);
      auto self = static_cast<std::size_t>(std::lower_bound(active.begin(), active.end(), src) - active.begin());
      if (pick >= self) ++pick;
      f.dst = active[pick];
      const double s = std::max(1.0, std::round(spec.distribution.sample(rng)));
      f.size_bits = static_cast<std::uint64_t>(s);
      f.arrival_s = t;
      f.cls = class_of(s, c);
      sink(f);
    }
  }
}

/// All flows of one window, sorted by (arrival, src).
inline std::vector<Flow> generate(const TrafficSpec& spec, const NetworkConfig& c) {
  std::vector<Flow> flows;
  for_each_flow(spec, c, [&](const Flow& f) { flows.push_back(f); });
  std::stable_sort(flows.begin(), flows.end(), [](const Flow& a, const Flow& b) {
    return a.arrival_s < b.arrival_s || (a.arrival_s == b.arrival_s && a.src < b.src);
  });
  return flows;
}

/// Expected bits/second per ToR in each flow class.
struct ClassRates {
  double small_bps = 0;
  double medium_bps = 0;
  double large_bps = 0;

  double total() const { return small_bps + medium_bps + large_bps; }
  double of(FlowClass c) const {
    switch (c) {
      case FlowClass::small: return small_bps;
      case FlowClass::medium: return medium_bps;
      case FlowClass::large: return large_bps;
    }
    return 0;
  }
};

/// U(x, tau) = x * k * r * (fraction of bytes in class tau), from the
/// distribution's closed-form partial moments.
inline ClassRates class_rates(const FlowSizeDistribution& d, double x, const NetworkConfig& c) {
  const double inf = std::numeric_limits<double>::infinity();
  // Rates at full load first, then scaled by x, so U(x) = x * U(1) exactly.
  const double full = c.k() * c.rate_bps;
  const double mean = d.mean();
  const double m = c.medium_bits();
  const double l = c.large_bits();
  ClassRates r;
  r.small_bps = x * (full * (d.byte_mass(0.0, m) / mean));
  r.medium_bps = x * (full * (d.byte_mass(m, l) / mean));
  r.large_bps = x * (full * (d.byte_mass(l, inf) / mean));
  return r;
}

enum class ClassFilter { small, medium, large, all };

inline ClassFilter filter_of(FlowClass c) {
  switch (c) {
    case FlowClass::small: return ClassFilter::small;
    case FlowClass::medium: return ClassFilter::medium;
    case FlowClass::large: return ClassFilter::large;
  }
  return ClassFilter::all;
}

/// n x n bit totals accumulated over one window, kept per flow class.
class DemandMatrix {
 public:
  explicit DemandMatrix(int n, double window_s = 1.0)
      : n_(n), window_s_(window_s), cells_(3 * static_cast<std::size_t>(n) * n, 0) {
    if (n < 2) throw ValidationError("n", "demand matrix needs n >= 2");
  }

  static DemandMatrix from_flows(std::span<const Flow> flows, int n, double window_s = 1.0) {
    DemandMatrix d(n, window_s);
    for (const auto& f : flows) d.add(f);
    return d;
  }

  void add(const Flow& f) {
    if (f.src == f.dst) throw ValidationError("dst", "demand matrix diagonal must stay zero");
    cells_[index(f.cls, f.src, f.dst)] += f.size_bits;
  }

  int n() const { return n_; }
  double window_s() const { return window_s_; }

  std::uint64_t cell(TorId i, TorId j, ClassFilter filter = ClassFilter::all) const {
    if (filter == ClassFilter::all)
      return cells_[index(FlowClass::small, i, j)] + cells_[index(FlowClass::medium, i, j)] +
             cells_[index(FlowClass::large, i, j)];
    return cells_[index(static_cast<FlowClass>(filter), i, j)];
  }

  std::uint64_t row_total(TorId i, ClassFilter filter = ClassFilter::all) const {
    std::uint64_t s = 0;
    for (TorId j = 0; j < n_; ++j) s += cell(i, j, filter);
    return s;
  }

  std::uint64_t total(ClassFilter filter = ClassFilter::all) const {
    std::uint64_t s = 0;
    for (TorId i = 0; i < n_; ++i) s += row_total(i, filter);
    return s;
  }

 private:
  std::size_t index(FlowClass c, TorId i, TorId j) const {
    return (static_cast<std::size_t>(c) * n_ + i) * n_ + j;
  }

  int n_;
  double window_s_;
  std::vector<std::uint64_t> cells_;
};

/// Delta(P) = 1/2 * sum |p_i - 1/n|, the total variation distance of P from
/// the uniform distribution over its n outcomes.
inline double variation_distance(std::span<const double> p) {
  if (p.empty()) throw ValidationError("P", "empty distribution");
  double sum = 0;
  for (double v : p) {
    if (v < 0) throw ValidationError("P", "negative probability mass");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("P", "probabilities sum to " + csv::format_double(sum));
  const double u = 1.0 / static_cast<double>(p.size());
  double d = 0;
  for (double v : p) d += std::abs(v - u);
  return 0.5 * d;
}

/// Which destinations a row's load distribution ranges over.
enum class DestinationScope {
  all_others,   // uniform model: every other ToR
  active_only,  // skewed model: the other ToRs that send traffic
};

/// Byte-weighted mean over sending rows of 1 - Delta(row), where each row is
/// the load distribution of a source over its destination scope. The medium
/// filter gives phi_m.
inline double skewness_phi(const DemandMatrix& d, ClassFilter filter = ClassFilter::all,
                           DestinationScope scope = DestinationScope::all_others) {
  const int n = d.n();
  std::vector<TorId> dests;
  if (scope == DestinationScope::active_only) {
    for (TorId i = 0; i < n; ++i)
      if (d.row_total(i) > 0) dests.push_back(i);
  } else {
    dests.resize(n);
    std::iota(dests.begin(), dests.end(), 0);
  }
  double weighted = 0;
  double weight = 0;
  std::vector<double> p;
  for (TorId i = 0; i < n; ++i) {
    const auto row = d.row_total(i, filter);
    if (row == 0) continue;
    p.clear();
    for (TorId j : dests)
      if (j != i) p.push_back(static_cast<double>(d.cell(i, j, filter)) / static_cast<double>(row));
    if (p.empty()) continue;
    // Renormalise against rounding before the sum-to-one check.
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p) v /= s;
    const double phi_row = 1.0 - variation_distance(p);
    weighted += phi_row * static_cast<double>(row);
    weight += static_cast<double>(row);
  }
  if (!(weight > 0)) throw ValidationError("demand", "no traffic in the selected class");
  return weighted / weight;
}

// Flow traces: `arrival_s,src,dst,size_bits,class`.

inline void write_trace(std::ostream& os, std::span<const Flow> flows) {
  csv::Writer w(os);
  w.header({"arrival_s", "src", "dst", "size_bits", "class"});
  for (const auto& f : flows) {
    w.field(f.arrival_s).field(static_cast<std::int64_t>(f.src)).field(static_cast<std::int64_t>(f.dst))
        .field(f.size_bits).field(to_string(f.cls));
    w.end_row();
  }
}

/// Reads a trace; every record is checked against `c` (indices, sizes,
/// class consistency).
inline std::vector<Flow> read_trace(std::istream& in, const NetworkConfig& c, const std::string& source = "trace") {
  std::vector<Flow> flows;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    auto rec = csv::split_record(line);
    if (!header) {
      if (rec.size() != 5 || rec[0] != "arrival_s" || rec[1] != "src" || rec[2] != "dst" ||
          rec[3] != "size_bits" || rec[4] != "class")
        throw ParseError(source, lineno, "expected header 'arrival_s,src,dst,size_bits,class'");
      header = true;
      continue;
    }
    if (rec.size() != 5) throw ParseError(source, lineno, "expected 5 fields");
    try {
      Flow f;
      f.arrival_s = csv::parse_double(rec[0], "arrival_s");
      f.src = static_cast<TorId>(csv::parse_int(rec[1], "src"));
      f.dst = static_cast<TorId>(csv::parse_int(rec[2], "dst"));
      auto size = csv::parse_int(rec[3], "size_bits");
      if (size <= 0) throw ValidationError("size_bits", "flow size must be > 0");
      f.size_bits = static_cast<std::uint64_t>(size);
      f.cls = flow_class_from_string(csv::trim(rec[4]));
      check_flow(f, c);
      flows.push_back(f);
    } catch (const Error& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  if (!header) throw ParseError(source, 0, "empty trace");
  return flows;
}

}  // namespace tmt::traffic
