#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tmt/analytics.hpp"
#include "tmt/config_io.hpp"
#include "tmt/csv.hpp"
#include "tmt/sim/simulator.hpp"
#include "tmt/topology.hpp"
#include "tmt/traffic.hpp"

namespace tmt::cli {

/// Output of one command: a primary CSV plus any side files, all keyed by
/// file name relative to the output directory.
struct Report {
  std::string name;
  std::string csv;
  std::vector<std::pair<std::string, std::string>> files;
};

/// Runs fn(0..count-1) on up to `threads` workers and returns the results in
/// index order. The first failing index (in order) has its exception
/// rethrown.
template <class T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& fn, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::vector<std::optional<T>> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        out[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  std::vector<T> res;
  res.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    res.push_back(std::move(*out[i]));
  }
  return res;
}

/// Config named by the manifest (profile defaults when no path), with the
/// manifest's profile as the base when given, validated.
inline Config resolve_config(const RunManifest& m) {
  Config c = m.config_path.empty() ? parse_config("", "<defaults>", "", m.profile)
                                   : load_config(m.config_path, m.profile);
  c = validate(std::move(c));
  check_manifest(m, c.network);
  return c;
}

/// Mean expected path length over `seeds` expanders of degree k on n ToRs
/// (seeds 1..seeds).
struct EplStats {
  double mean = 0, min = 0, max = 0;
};

inline EplStats measure_epl(int n, int k, int seeds) {
  if (k < 1) throw ValidationError("k", "expander needs degree >= 1");
  if (seeds < 1) throw ValidationError("seeds", "at least one seed required");
  auto v = parallel_map<double>(static_cast<std::size_t>(seeds), [&](std::size_t i) {
    return topology::expected_path_length(topology::build_expander(n, k, i + 1));
  });
  EplStats s{0, v[0], v[0]};
  for (double e : v) {
    s.mean += e;
    s.min = std::min(s.min, e);
    s.max = std::max(s.max, e);
  }
  s.mean /= seeds;
  return s;
}

inline double epl_full(const Config& c) {
  return c.analysis.epl ? *c.analysis.epl : measure_epl(c.network.n, c.network.k(), c.analysis.epl_seeds).mean;
}

inline double epl_static(const Config& c) {
  if (c.analysis.epl_static) return *c.analysis.epl_static;
  if (c.network.k_s < 1) return 1.0;
  return measure_epl(c.network.n, c.network.k_s, c.analysis.epl_seeds).mean;
}

/// Operating point of one grid value.
struct Point {
  double x = 0;
  double phi = 1;
  NetworkConfig network;
};

inline std::vector<Point> grid_points(const Config& c, const RunManifest& m) {
  Point base{c.traffic.load_x, c.analysis.phi, c.network};
  if (!m.sweep) return {base};
  std::vector<Point> pts;
  for (double v : m.grid.values()) {
    Point p = base;
    switch (*m.sweep) {
      case SweepVar::load_x:
      case SweepVar::active_fraction_x: p.x = v; break;
      case SweepVar::phi: p.phi = v; break;
      case SweepVar::k_c: {
        const int total = p.network.k_r + p.network.k_c;
        p.network.k_c = static_cast<int>(v);
        p.network.k_r = total - p.network.k_c;
        break;
      }
    }
    pts.push_back(p);
  }
  return pts;
}

inline std::string point_label(const Point& p) {
  return "x=" + csv::format_double(p.x) + " phi=" + csv::format_double(p.phi) +
         " k_r=" + std::to_string(p.network.k_r) + " k_c=" + std::to_string(p.network.k_c);
}

/// Rows `x,phi,phi_m,dct_expander_s,dct_rotor_s,dct_hybrid_s,k_r_star,k_c_star,
/// L_star_expander,L_star_rotor,L_star_hybrid,large_threshold_bits,z`.
/// Hybrid columns use the optimal split, except in a k_c sweep where they use
/// the swept split.
inline Report cmd_analyze(const Config& c, const RunManifest& m) {
  const double full = epl_full(c);
  const double stat = epl_static(c);
  const auto pts = grid_points(c, m);
  const bool fixed_split = m.sweep == SweepVar::k_c;
  auto rows = parallel_map<analytics::AnalyticsReport>(pts.size(), [&](std::size_t i) {
    const auto& p = pts[i];
    try {
      analytics::ReportInputs in;
      in.x = p.x;
      in.phi = p.phi;
      in.phi_m = c.analysis.phi_m;
      in.epl_full = full;
      in.epl_static = stat;
      in.distribution = c.traffic.distribution;
      auto r = analytics::analyze(in, p.network);
      if (fixed_split) {
        const analytics::Split s{p.network.k_r, p.network.k_c, 0.0};
        r.dct_hybrid_s = analytics::dct_hybrid_uniform(p.x, in.distribution, in.phi_m, p.network, stat, s);
        if (p.x > 0)
          r.L_star_hybrid = analytics::throughput_star(analytics::System::hybrid, p.x,
                                                       {p.phi, full, in.distribution}, p.network);
      }
      return r;
    } catch (const Error& e) {
      throw Error("at " + point_label(p) + ": " + e.what());
    }
  });
  std::ostringstream os;
  csv::Writer w(os);
  w.header({"x", "phi", "phi_m", "dct_expander_s", "dct_rotor_s", "dct_hybrid_s", "k_r_star", "k_c_star",
            "L_star_expander", "L_star_rotor", "L_star_hybrid", "large_threshold_bits", "z"});
  for (const auto& r : rows) {
    w.field(r.x).field(r.phi).field(r.phi_m).field(r.dct_expander_s).field(r.dct_rotor_s).field(r.dct_hybrid_s);
    w.field(r.k_r_star).field(r.k_c_star).field(r.L_star_expander).field(r.L_star_rotor).field(r.L_star_hybrid);
    w.field(r.large_threshold_bits).field(r.z);
    w.end_row();
  }
  return {"analyze.csv", os.str(), {}};
}

inline double analytic_dct_per_window_second(double x, std::span<const Flow> flows, const Config& c,
                                             const NetworkConfig& net, double full_epl, double static_epl) {
  if (flows.empty() || x == 0) return 0.0;
  const auto d = traffic::DemandMatrix::from_flows(flows, net.n, c.traffic.window_s);
  const auto scope = c.traffic.model == traffic::Model::uniform ? traffic::DestinationScope::all_others
                                                                : traffic::DestinationScope::active_only;
  const int k = net.k();
  const bool skewed = c.traffic.model == traffic::Model::skewed;
  const double L = c.traffic.per_tor_rate_L;
  if (net.k_s == k) return skewed ? analytics::dct_expander_skewed(L, x, full_epl) : analytics::dct_expander(x, full_epl);
  if (net.k_r == k) {
    const double phi = traffic::skewness_phi(d, traffic::ClassFilter::all, scope);
    return skewed ? analytics::dct_rotor_skewed(L, x, phi, net) : analytics::dct_rotor(x, phi, net);
  }
  double phi_m = c.analysis.phi_m;
  if (d.total(traffic::ClassFilter::medium) > 0) phi_m = traffic::skewness_phi(d, traffic::ClassFilter::medium, scope);
  if (skewed) return analytics::hybrid_components_skewed(L, x, c.traffic.distribution, phi_m, net, static_epl).dct_s();
  const analytics::Split s{net.k_r, net.k_c, 0.0};
  return analytics::dct_hybrid_uniform(x, c.traffic.distribution, phi_m, net, static_epl, s);
}

/// Analytic DCT the simulator is compared against: the single-plane closed
/// form for a pure network, the max-component hybrid DCT otherwise, scaled by
/// the window length (the closed forms are per second of demand). Skewed
/// traffic uses the S_L(x) forms with L = traffic.per_tor_rate_L. Skewness is
/// measured on the generated demand.
inline double analytic_dct(double x, std::span<const Flow> flows, const Config& c, const NetworkConfig& net,
                           double full_epl, double static_epl) {
  return c.traffic.window_s * analytic_dct_per_window_second(x, flows, c, net, full_epl, static_epl);
}

/// Per grid point and seed: generate, simulate, compare. Primary rows
/// `x,seed,dct_sim_s,dct_analytic_s,rel_err,spill_count`; side files hold
/// the trace, per-flow records and a summary of every run. Runs that hit the
/// cutoff report dct_sim_s as "did-not-complete".
inline Report cmd_simulate(const Config& c, const RunManifest& m) {
  const auto pts = grid_points(c, m);
  const bool needs_epl = std::any_of(pts.begin(), pts.end(), [](const Point& p) { return p.network.k_s > 0; });
  const double full = needs_epl ? epl_full(c) : 1.0;
  const double stat = needs_epl ? epl_static(c) : 1.0;
  const auto seeds = static_cast<std::size_t>(m.seeds);

  struct Run {
    double x = 0;
    std::uint64_t seed = 0;
    sim::SimResult res;
    double analytic = 0;
    std::string trace, records, summary, tag;
  };
  auto runs = parallel_map<Run>(pts.size() * seeds, [&](std::size_t i) {
    const auto& p = pts[i / seeds];
    const std::uint64_t s = i % seeds;
    try {
      traffic::TrafficSpec spec = c.traffic;
      spec.load_x = p.x;
      spec.seed = c.traffic.seed + s;
      const auto flows = traffic::generate(spec, p.network);
      sim::SimOptions opt = c.sim;
      opt.seed = c.sim.seed + s;
      Run r;
      r.x = p.x;
      r.seed = s;
      r.res = sim::run(p.network, flows, opt);
      r.analytic = analytic_dct(p.x, flows, c, p.network, full, stat);
      std::ostringstream t, rec, sum;
      traffic::write_trace(t, flows);
      sim::write_flow_records(rec, r.res);
      sim::write_summary(sum, r.res);
      r.trace = t.str();
      r.records = rec.str();
      r.summary = sum.str();
      r.tag = "p" + std::to_string(i / seeds) + "_seed" + std::to_string(s);
      return r;
    } catch (const Error& e) {
      throw Error("at " + point_label(p) + " seed " + std::to_string(s) + ": " + e.what());
    }
  });

  Report rep{"simulate.csv", {}, {}};
  std::ostringstream os;
  csv::Writer w(os);
  w.header({"x", "seed", "dct_sim_s", "dct_analytic_s", "rel_err", "spill_count"});
  for (auto& r : runs) {
    w.field(r.x).field(r.seed);
    if (r.res.completed)
      w.field(r.res.dct_s);
    else
      w.field(std::string_view("did-not-complete"));
    w.field(r.analytic);
    if (!r.res.completed)
      w.field(std::numeric_limits<double>::infinity());
    else if (r.analytic > 0)
      w.field(std::abs(r.res.dct_s - r.analytic) / r.analytic);
    else
      w.field(r.res.dct_s == 0 ? 0.0 : std::numeric_limits<double>::infinity());
    w.field(static_cast<std::uint64_t>(r.res.spill_count));
    w.end_row();
    rep.files.emplace_back("trace_" + r.tag + ".csv", std::move(r.trace));
    rep.files.emplace_back("flows_" + r.tag + ".csv", std::move(r.records));
    rep.files.emplace_back("summary_" + r.tag + ".csv", std::move(r.summary));
  }
  rep.csv = os.str();
  return rep;
}

/// Rows `k_r_plus_k_c,x,phi_m,k_r_star,k_c_star,real_ratio`.
inline Report cmd_split(const Config& c, const RunManifest& m) {
  const auto pts = grid_points(c, m);
  std::ostringstream os;
  csv::Writer w(os);
  w.header({"k_r_plus_k_c", "x", "phi_m", "k_r_star", "k_c_star", "real_ratio"});
  for (const auto& p : pts) {
    analytics::Split s;
    try {
      s = analytics::optimal_split(c.traffic.distribution, p.x, c.analysis.phi_m, p.network);
    } catch (const Error& e) {
      throw Error("at " + point_label(p) + ": " + e.what());
    }
    w.field(p.network.k_r + p.network.k_c).field(p.x).field(c.analysis.phi_m);
    w.field(s.k_r).field(s.k_c).field(s.real_ratio);
    w.end_row();
  }
  return {"split.csv", os.str(), {}};
}

/// Rows `phi,rate_bps,medium_bits,large_threshold_bits,large_threshold_mb`.
inline Report cmd_threshold(const Config& c, const RunManifest& m) {
  const auto pts = grid_points(c, m);
  std::ostringstream os;
  csv::Writer w(os);
  w.header({"phi", "rate_bps", "medium_bits", "large_threshold_bits", "large_threshold_mb"});
  for (const auto& p : pts) {
    double l;
    try {
      l = analytics::large_flow_threshold(p.phi, p.network);
    } catch (const Error& e) {
      throw Error("at " + point_label(p) + ": " + e.what());
    }
    w.field(p.phi).field(p.network.rate_bps).field(p.network.medium_bits()).field(l).field(units::bits_to_mb(l));
    w.end_row();
  }
  return {"threshold.csv", os.str(), {}};
}

/// One row `n,k,seeds,epl_mean,epl_min,epl_max` for an expander of degree k
/// = k_s + k_r + k_c; seeds come from the manifest.
inline Report cmd_epl(const Config& c, const RunManifest& m) {
  const int n = c.network.n, k = c.network.k();
  const auto s = measure_epl(n, k, m.seeds);
  std::ostringstream os;
  csv::Writer w(os);
  w.header({"n", "k", "seeds", "epl_mean", "epl_min", "epl_max"});
  w.field(n).field(k).field(m.seeds).field(s.mean).field(s.min).field(s.max);
  w.end_row();
  return {"epl.csv", os.str(), {}};
}

inline Report run_command(const RunManifest& m) {
  const Config c = resolve_config(m);
  if (m.command == "analyze") return cmd_analyze(c, m);
  if (m.command == "simulate") return cmd_simulate(c, m);
  if (m.command == "split") return cmd_split(c, m);
  if (m.command == "threshold") return cmd_threshold(c, m);
  if (m.command == "epl") return cmd_epl(c, m);
  throw ValidationError("command", "unknown command '" + m.command + "'");
}

}  // namespace tmt::cli
