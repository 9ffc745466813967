#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tmt/csv.hpp"
#include "tmt/distribution.hpp"
#include "tmt/error.hpp"
#include "tmt/model.hpp"
#include "tmt/sim/simulator.hpp"
#include "tmt/traffic.hpp"
#include "tmt/units.hpp"

// Plain-text configuration: one `key = value` per line, `#` starts a comment,
// string values may be double-quoted. Human-scale units (µs, ms, Gbps) are
// used where the value converts back exactly; otherwise the base-unit key
// (`timing.slot_s`, `link.rate_bps`, ...) is written.
//
//   profile = "paper-numeric"
//   network.n = 256
//   network.k_s = 5
//   network.k_r = 16
//   network.k_c = 16
//   link.rate_gbps = 10
//   timing.slot_us = 100
//   timing.rotor_reconfig_us = 10
//   timing.demand_aware_reconfig_ms = 15
//   thresholds.medium_bits = 1000000
//   thresholds.large_bits = 125000000
//   thresholds.phi = 0
//   traffic.model = "uniform"
//   traffic.load_x = 0.5
//   traffic.per_tor_rate_L = 1
//   traffic.window_s = 1
//   traffic.seed = 1
//   traffic.distribution.kind = "log_uniform"   # or pareto, two_point, empirical
//   traffic.distribution.lo_bits = 1000000
//   traffic.distribution.hi_bits = 64000000
//   traffic.distribution.shape = 1.2             # pareto
//   traffic.distribution.sizes_bits = "1e7 1e9"  # two_point, empirical
//   traffic.distribution.probabilities = "0.9 0.1"
//   traffic.distribution.file = "sizes.csv"      # `size_bits,probability`
//   analysis.phi = 1
//   analysis.phi_m = 1
//   analysis.epl = 1.85          # measured from the built expander if absent
//   analysis.epl_static = 2.9
//   analysis.epl_seeds = 10
//   sim.injection = "batch"       # or online
//   sim.admission = "balanced"    # or horizon, immediate
//   sim.cache_horizon_s = inf
//   sim.cutoff_s = 100
//   sim.seed = 1
//   sim.audit = true

namespace tmt {

struct AnalysisSettings {
  double phi = 1.0;
  double phi_m = 1.0;
  std::optional<double> epl;
  std::optional<double> epl_static;
  int epl_seeds = 10;

  bool operator==(const AnalysisSettings&) const = default;
};

struct Config {
  std::string profile = "paper-numeric";
  NetworkConfig network = tmt::profile("paper-numeric");
  traffic::TrafficSpec traffic;
  std::string distribution_file;  // set when the distribution was read from a file
  AnalysisSettings analysis;
  sim::SimOptions sim;

  bool operator==(const Config&) const = default;
};

namespace detail {

inline std::string unquote(std::string_view raw) {
  const std::string v = csv::trim(raw);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

inline std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

inline std::vector<double> parse_list(const std::string& v, const std::string& key) {
  // Comma and/or whitespace separated.
  std::vector<double> out;
  std::string flat = v;
  std::replace(flat.begin(), flat.end(), ',', ' ');
  std::istringstream in(flat);
  for (std::string cur; in >> cur;) out.push_back(csv::parse_double(cur, key));
  return out;
}

inline std::string format_list(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ' ';
    s += csv::format_double(xs[i]);
  }
  return s;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParseError(key + ": expected true or false, got '" + v + "'");
}

inline std::int64_t parse_integer(const std::string& v, const std::string& key) {
  return csv::parse_int(v, key);
}

// A human-unit value h with from_human(h) == base exactly, if one exists
// within a few ulps of to_human(base).
inline std::optional<double> exact_human(double base, double (*to_human)(double), double (*from_human)(double)) {
  double h = to_human(base);
  if (!std::isfinite(h)) return std::nullopt;
  if (from_human(h) == base) return h;
  double up = h, down = h;
  for (int i = 0; i < 8; ++i) {
    up = std::nextafter(up, INFINITY);
    down = std::nextafter(down, -INFINITY);
    if (from_human(up) == base) return up;
    if (from_human(down) == base) return down;
  }
  return std::nullopt;
}

}  // namespace detail

inline std::string_view to_string(sim::Injection i) { return i == sim::Injection::batch ? "batch" : "online"; }
inline std::string_view to_string(sim::CacheAdmission a) {
  switch (a) {
    case sim::CacheAdmission::horizon: return "horizon";
    case sim::CacheAdmission::immediate: return "immediate";
    case sim::CacheAdmission::balanced: return "balanced";
  }
  return "?";
}

inline std::string_view to_string(FlowSizeDistribution::Kind k) {
  switch (k) {
    case FlowSizeDistribution::Kind::empirical: return "empirical";
    case FlowSizeDistribution::Kind::two_point: return "two_point";
    case FlowSizeDistribution::Kind::log_uniform: return "log_uniform";
    case FlowSizeDistribution::Kind::pareto: return "pareto";
  }
  return "?";
}

/// Parses configuration text. `base_dir` resolves a relative
/// `traffic.distribution.file`; a non-empty `profile_override` replaces the
/// file's `profile`. The result is not validated.
inline Config parse_config(std::string_view text, const std::string& source = "<config>",
                           const std::string& base_dir = "", const std::string& profile_override = "") {
  std::map<std::string, std::pair<std::string, std::size_t>> kv;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string line = csv::trim(detail::strip_comment(text.substr(pos, nl - pos)));
    pos = nl + 1;
    ++lineno;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, lineno, "expected 'key = value'");
    std::string key = csv::trim(std::string_view(line).substr(0, eq));
    std::string value = detail::unquote(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ParseError(source, lineno, "empty key");
    if (kv.count(key)) throw ParseError(source, lineno, "duplicate key '" + key + "'");
    kv[key] = {value, lineno};
  }

  Config c;
  std::set<std::string> used;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    used.insert(key);
    return it->second.first;
  };
  auto wrap = [&](const std::string& key, auto&& fn) {
    auto v = get(key);
    if (!v) return;
    try {
      fn(*v);
    } catch (const ParseError& e) {
      throw ParseError(source, kv[key].second, e.what());
    } catch (const ValidationError& e) {
      throw ParseError(source, kv[key].second, std::string(key) + ": " + e.what());
    }
  };
  auto num = [&](const std::string& key, double& out) {
    wrap(key, [&](const std::string& v) { out = csv::parse_double(v, key); });
  };
  auto num_opt = [&](const std::string& key, std::optional<double>& out) {
    wrap(key, [&](const std::string& v) { out = csv::parse_double(v, key); });
  };
  auto integer = [&](const std::string& key, int& out) {
    wrap(key, [&](const std::string& v) { out = static_cast<int>(detail::parse_integer(v, key)); });
  };
  auto scaled = [&](const std::string& human_key, const std::string& base_key, double& out, double (*from)(double)) {
    if (kv.count(human_key) && kv.count(base_key))
      throw ParseError(source, kv[base_key].second, "both '" + human_key + "' and '" + base_key + "' given");
    wrap(human_key, [&](const std::string& v) { out = from(csv::parse_double(v, human_key)); });
    num(base_key, out);
  };

  wrap("profile", [&](const std::string& v) {
    c.network = tmt::profile(v);
    c.profile = v;
  });
  if (!profile_override.empty()) {
    c.network = tmt::profile(profile_override);
    c.profile = profile_override;
  }
  auto& n = c.network;
  integer("network.n", n.n);
  integer("network.k_s", n.k_s);
  integer("network.k_r", n.k_r);
  integer("network.k_c", n.k_c);
  scaled("link.rate_gbps", "link.rate_bps", n.rate_bps, units::gbps_to_bps);
  scaled("timing.slot_us", "timing.slot_s", n.slot_s, units::us_to_s);
  scaled("timing.rotor_reconfig_us", "timing.rotor_reconfig_s", n.rotor_reconfig_s, units::us_to_s);
  scaled("timing.demand_aware_reconfig_ms", "timing.demand_aware_reconfig_s", n.cache_reconfig_s, units::ms_to_s);
  num_opt("thresholds.medium_bits", n.medium_threshold_bits);
  num_opt("thresholds.large_bits", n.large_threshold_bits);
  num("thresholds.phi", n.threshold_phi);

  auto& t = c.traffic;
  wrap("traffic.model", [&](const std::string& v) { t.model = traffic::model_from_string(v); });
  num("traffic.load_x", t.load_x);
  num("traffic.per_tor_rate_L", t.per_tor_rate_L);
  num("traffic.window_s", t.window_s);
  wrap("traffic.seed", [&](const std::string& v) {
    t.seed = static_cast<std::uint64_t>(detail::parse_integer(v, "traffic.seed"));
  });

  // Distribution.
  std::string kind = "log_uniform";
  if (auto v = get("traffic.distribution.kind")) kind = *v;
  double lo = t.distribution.support_lo(), hi = t.distribution.support_hi(), shape = 1.5;
  std::optional<double> hi_opt;
  num("traffic.distribution.lo_bits", lo);
  num_opt("traffic.distribution.hi_bits", hi_opt);
  num("traffic.distribution.shape", shape);
  std::vector<double> sizes, probs;
  wrap("traffic.distribution.sizes_bits",
       [&](const std::string& v) { sizes = detail::parse_list(v, "traffic.distribution.sizes_bits"); });
  wrap("traffic.distribution.probabilities",
       [&](const std::string& v) { probs = detail::parse_list(v, "traffic.distribution.probabilities"); });
  std::optional<std::string> file = get("traffic.distribution.file");
  const auto dist_line = [&]() -> std::size_t {
    for (const char* k : {"traffic.distribution.file", "traffic.distribution.kind", "traffic.distribution.lo_bits",
                          "traffic.distribution.sizes_bits"})
      if (kv.count(k)) return kv[k].second;
    return 0;
  };
  try {
    if (file) {
      c.distribution_file = *file;
      std::string path = *file;
      if (!base_dir.empty() && !path.empty() && path.front() != '/') path = base_dir + "/" + path;
      t.distribution = FlowSizeDistribution::from_csv(path);
    } else if (kind == "log_uniform") {
      t.distribution = FlowSizeDistribution::log_uniform(lo, hi_opt.value_or(hi));
    } else if (kind == "pareto") {
      t.distribution = FlowSizeDistribution::pareto(shape, lo, hi_opt.value_or(INFINITY));
    } else if (kind == "two_point") {
      if (sizes.size() != 2 || probs.size() != 2)
        throw ValidationError("traffic.distribution", "two_point needs two sizes and two probabilities");
      t.distribution = FlowSizeDistribution::two_point(sizes[0], probs[0], sizes[1], probs[1]);
    } else if (kind == "empirical") {
      t.distribution = FlowSizeDistribution::empirical(sizes, probs);
    } else {
      throw ValidationError("traffic.distribution.kind", "unknown kind '" + kind + "'");
    }
  } catch (const ValidationError& e) {
    throw ParseError(source, dist_line(), e.what());
  }

  auto& a = c.analysis;
  num("analysis.phi", a.phi);
  num("analysis.phi_m", a.phi_m);
  num_opt("analysis.epl", a.epl);
  num_opt("analysis.epl_static", a.epl_static);
  integer("analysis.epl_seeds", a.epl_seeds);

  auto& s = c.sim;
  wrap("sim.injection", [&](const std::string& v) {
    if (v == "batch")
      s.injection = sim::Injection::batch;
    else if (v == "online")
      s.injection = sim::Injection::online;
    else
      throw ParseError("sim.injection: expected batch or online, got '" + v + "'");
  });
  wrap("sim.admission", [&](const std::string& v) {
    if (v == "horizon")
      s.admission = sim::CacheAdmission::horizon;
    else if (v == "immediate")
      s.admission = sim::CacheAdmission::immediate;
    else if (v == "balanced")
      s.admission = sim::CacheAdmission::balanced;
    else
      throw ParseError("sim.admission: expected horizon, immediate or balanced, got '" + v + "'");
  });
  num("sim.cache_horizon_s", s.cache_horizon_s);
  num("sim.cutoff_s", s.cutoff_s);
  wrap("sim.seed", [&](const std::string& v) { s.seed = static_cast<std::uint64_t>(detail::parse_integer(v, "sim.seed")); });
  wrap("sim.audit", [&](const std::string& v) { s.audit = detail::parse_bool(v, "sim.audit"); });

  for (const auto& [key, val] : kv)
    if (!used.count(key)) throw ParseError(source, val.second, "unknown key '" + key + "'");
  return c;
}

inline Config load_config(const std::string& path, const std::string& profile_override = "") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto slash = path.find_last_of('/');
  return parse_config(ss.str(), path, slash == std::string::npos ? "" : path.substr(0, slash), profile_override);
}

/// Checks every section and fills derived network thresholds.
inline Config validate(Config c) {
  c.network = validate(std::move(c.network));
  c.traffic.check();
  if (!(c.analysis.phi >= 0 && c.analysis.phi <= 1)) throw ValidationError("analysis.phi", "must lie in [0, 1]");
  if (!(c.analysis.phi_m >= 0 && c.analysis.phi_m <= 1))
    throw ValidationError("analysis.phi_m", "must lie in [0, 1]");
  if (c.analysis.epl && !(*c.analysis.epl >= 1)) throw ValidationError("analysis.epl", "must be >= 1");
  if (c.analysis.epl_static && !(*c.analysis.epl_static >= 1))
    throw ValidationError("analysis.epl_static", "must be >= 1");
  if (c.analysis.epl_seeds < 1) throw ValidationError("analysis.epl_seeds", "must be >= 1");
  if (!(c.sim.cache_horizon_s >= 0)) throw ValidationError("sim.cache_horizon_s", "must be >= 0");
  if (!(c.sim.cutoff_s > 0)) throw ValidationError("sim.cutoff_s", "must be > 0");
  return c;
}

/// Writes every key; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const Config& c) {
  std::ostringstream o;
  auto kv = [&](std::string_view key, const std::string& v) { o << key << " = " << v << '\n'; };
  auto str = [&](std::string_view key, std::string_view v) { o << key << " = \"" << v << "\"\n"; };
  auto num = [&](std::string_view key, double v) { kv(key, csv::format_double(v)); };
  auto scaled = [&](std::string_view human_key, std::string_view base_key, double v, double (*to)(double),
                    double (*from)(double)) {
    if (auto h = detail::exact_human(v, to, from))
      num(human_key, *h);
    else
      num(base_key, v);
  };
  const auto& n = c.network;
  str("profile", c.profile);
  kv("network.n", std::to_string(n.n));
  kv("network.k_s", std::to_string(n.k_s));
  kv("network.k_r", std::to_string(n.k_r));
  kv("network.k_c", std::to_string(n.k_c));
  scaled("link.rate_gbps", "link.rate_bps", n.rate_bps, units::bps_to_gbps, units::gbps_to_bps);
  scaled("timing.slot_us", "timing.slot_s", n.slot_s, units::s_to_us, units::us_to_s);
  scaled("timing.rotor_reconfig_us", "timing.rotor_reconfig_s", n.rotor_reconfig_s, units::s_to_us, units::us_to_s);
  scaled("timing.demand_aware_reconfig_ms", "timing.demand_aware_reconfig_s", n.cache_reconfig_s, units::s_to_ms,
         units::ms_to_s);
  if (n.medium_threshold_bits) num("thresholds.medium_bits", *n.medium_threshold_bits);
  if (n.large_threshold_bits) num("thresholds.large_bits", *n.large_threshold_bits);
  num("thresholds.phi", n.threshold_phi);

  const auto& t = c.traffic;
  str("traffic.model", traffic::to_string(t.model));
  num("traffic.load_x", t.load_x);
  num("traffic.per_tor_rate_L", t.per_tor_rate_L);
  num("traffic.window_s", t.window_s);
  kv("traffic.seed", std::to_string(t.seed));
  const auto& d = t.distribution;
  if (!c.distribution_file.empty()) {
    str("traffic.distribution.file", c.distribution_file);
  } else {
    str("traffic.distribution.kind", to_string(d.kind()));
    switch (d.kind()) {
      case FlowSizeDistribution::Kind::log_uniform:
        num("traffic.distribution.lo_bits", d.support_lo());
        num("traffic.distribution.hi_bits", d.support_hi());
        break;
      case FlowSizeDistribution::Kind::pareto:
        num("traffic.distribution.shape", d.shape());
        num("traffic.distribution.lo_bits", d.support_lo());
        if (std::isfinite(d.support_hi())) num("traffic.distribution.hi_bits", d.support_hi());
        break;
      case FlowSizeDistribution::Kind::two_point:
      case FlowSizeDistribution::Kind::empirical:
        str("traffic.distribution.sizes_bits", detail::format_list(d.atoms()));
        str("traffic.distribution.probabilities", detail::format_list(d.atom_probs()));
        break;
    }
  }

  const auto& a = c.analysis;
  num("analysis.phi", a.phi);
  num("analysis.phi_m", a.phi_m);
  if (a.epl) num("analysis.epl", *a.epl);
  if (a.epl_static) num("analysis.epl_static", *a.epl_static);
  kv("analysis.epl_seeds", std::to_string(a.epl_seeds));

  const auto& s = c.sim;
  str("sim.injection", to_string(s.injection));
  str("sim.admission", to_string(s.admission));
  num("sim.cache_horizon_s", s.cache_horizon_s);
  num("sim.cutoff_s", s.cutoff_s);
  kv("sim.seed", std::to_string(s.seed));
  kv("sim.audit", s.audit ? "true" : "false");
  return o.str();
}

// ---------------------------------------------------------------------------
// Run manifests

enum class SweepVar { load_x, active_fraction_x, phi, k_c };

inline std::string_view to_string(SweepVar v) {
  switch (v) {
    case SweepVar::load_x: return "load_x";
    case SweepVar::active_fraction_x: return "active_fraction_x";
    case SweepVar::phi: return "phi";
    case SweepVar::k_c: return "k_c";
  }
  return "?";
}

inline SweepVar sweep_var_from_string(std::string_view s) {
  if (s == "load_x") return SweepVar::load_x;
  if (s == "active_fraction_x") return SweepVar::active_fraction_x;
  if (s == "phi") return SweepVar::phi;
  if (s == "k_c") return SweepVar::k_c;
  throw ValidationError("sweep", "unknown sweep variable '" + std::string(s) + "' (load_x, active_fraction_x, phi, k_c)");
}

/// Inclusive grid start, start+step, ..., up to stop.
struct Grid {
  double start = 0;
  double stop = 0;
  double step = 1;

  std::vector<double> values() const {
    if (!(step > 0)) throw ValidationError("sweep", "step must be > 0");
    if (!(stop >= start)) throw ValidationError("sweep", "stop must be >= start");
    const auto count = static_cast<std::int64_t>(std::floor((stop - start) / step * (1 + 1e-12) + 1e-9)) + 1;
    if (count > 1000000) throw ValidationError("sweep", "grid has more than 1e6 points");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
      double x = start + static_cast<double>(i) * step;
      // Snap to 12 significant digits so 0.1 + 2*0.1 prints as 0.3.
      x = std::stod(csv::format_double(std::round(x * 1e12) / 1e12));
      v.push_back(std::min(x, stop));
    }
    return v;
  }
};

struct RunManifest {
  std::string command;
  std::string config_path;  // empty: profile defaults
  std::optional<SweepVar> sweep;
  Grid grid;
  int seeds = 1;
  std::string out_dir;  // empty: primary report to stdout
  std::string profile;  // overrides the config's network profile when set
};

/// "var=start:stop:step".
inline std::pair<SweepVar, Grid> parse_sweep(std::string_view s) {
  const auto eq = s.find('=');
  if (eq == std::string_view::npos) throw ValidationError("sweep", "expected var=start:stop:step");
  const SweepVar var = sweep_var_from_string(csv::trim(s.substr(0, eq)));
  std::string_view rest = s.substr(eq + 1);
  std::vector<double> parts;
  while (true) {
    const auto colon = rest.find(':');
    parts.push_back(csv::parse_double(rest.substr(0, colon), "sweep"));
    if (colon == std::string_view::npos) break;
    rest = rest.substr(colon + 1);
  }
  Grid g;
  if (parts.size() == 1) {
    g = {parts[0], parts[0], 1.0};
  } else if (parts.size() == 3) {
    g = {parts[0], parts[1], parts[2]};
  } else {
    throw ValidationError("sweep", "expected var=start:stop:step");
  }
  (void)g.values();
  return {var, g};
}

/// Checks grid values against the variable's domain for the given network.
inline void check_manifest(const RunManifest& m, const NetworkConfig& net) {
  if (m.seeds < 1) throw ValidationError("seeds", "at least one seed required");
  if (!m.sweep) return;
  for (double v : m.grid.values()) {
    switch (*m.sweep) {
      case SweepVar::load_x:
      case SweepVar::active_fraction_x:
      case SweepVar::phi:
        if (!(v >= 0 && v <= 1))
          throw ValidationError("sweep", std::string(to_string(*m.sweep)) + "=" + csv::format_double(v) +
                                             " outside [0, 1]");
        break;
      case SweepVar::k_c:
        if (v != std::floor(v) || v < 0 || v > net.k_r + net.k_c)
          throw ValidationError("sweep", "k_c=" + csv::format_double(v) + " must be an integer in [0, k_r + k_c]");
        break;
    }
  }
}

}  // namespace tmt
