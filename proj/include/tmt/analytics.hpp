#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "tmt/distribution.hpp"
#include "tmt/error.hpp"
#include "tmt/model.hpp"
#include "tmt/threshold.hpp"
#include "tmt/traffic.hpp"

// Closed-form demand completion times (DCT, seconds to drain the demand of a
// one-second window) and throughput for expander-net, rotor-net and the
// hybrid (k_s, k_r, k_c) network.

namespace tmt::analytics {

namespace detail {
inline void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(name, "must lie in [0, 1]");
}
}  // namespace detail

/// (R_r + delta) / delta: slot period over useful slot time.
inline double rotor_period_factor(const NetworkConfig& c) { return (c.rotor_reconfig_s + c.slot_s) / c.slot_s; }

/// Expander-net lower bound: x * epl.
inline double dct_expander(double x, double epl) {
  detail::check_unit(x, "x");
  if (!(epl >= 1.0)) throw ValidationError("epl", "expected path length must be >= 1");
  return x * epl;
}

/// Rotor-net lower bound: x * (2 - phi) * (R_r + delta) / delta.
inline double dct_rotor(double x, double phi, const NetworkConfig& c) {
  detail::check_unit(x, "x");
  detail::check_unit(phi, "phi");
  return x * (2.0 - phi) * rotor_period_factor(c);
}

/// Rotor DCT of a perfectly uniform all-to-all demand of `bits_per_tor`:
/// (slots needed) / (switches) * (slot period).
inline double dct_all_to_all_rotor(double bits_per_tor, int k, const NetworkConfig& c) {
  if (k < 1) throw ValidationError("k", "need at least one rotor switch");
  if (!(bits_per_tor >= 0)) throw ValidationError("bits_per_tor", "must be >= 0");
  return bits_per_tor / c.medium_bits() * (c.rotor_reconfig_s + c.slot_s) / k;
}

/// Rotor-plane DCT for `bits_per_tor` of traffic with one-hop fraction phi on
/// k_r switches: bits/|m| * (2 - phi) * (R_r + delta) / k_r.
inline double dct_rotor_component(double bits_per_tor, double phi, int k_r, const NetworkConfig& c) {
  if (!(bits_per_tor > 0)) return 0.0;
  if (k_r < 1) return std::numeric_limits<double>::infinity();
  return bits_per_tor / c.medium_bits() * (2.0 - phi) * (c.rotor_reconfig_s + c.slot_s) / k_r;
}

inline double large_flow_threshold(double phi, const NetworkConfig& c) {
  detail::check_unit(phi, "phi");
  return large_threshold_bits(phi, c.rate_bps, c.medium_bits(), c.rotor_reconfig_s, c.slot_s, c.cache_reconfig_s);
}

/// E[R_c / |f|] + 1/r over the large class, the expectation byte-weighted
/// (per-bit cost of serving large flows on demand-aware circuits).
/// Throws when the distribution has no mass at or above |l|.
inline double cache_cost_per_bit(const FlowSizeDistribution& d, const NetworkConfig& c) {
  const double recip = d.reciprocal_size_mean_above(c.large_bits());
  if (!(recip > 0)) throw ValidationError("distribution", "no flow-size mass at or above the large threshold");
  return c.cache_reconfig_s * recip + 1.0 / c.rate_bps;
}

/// Worst-case per-bit cost, every large flow exactly |l|: R_c/|l| + 1/r.
inline double cache_cost_per_bit_worst(const NetworkConfig& c) {
  return c.cache_reconfig_s / c.large_bits() + 1.0 / c.rate_bps;
}

/// Demand-aware DCT: (large_bits / k_c) * (E[R_c/|f|] + 1/r).
inline double dct_cache(double large_bits, int k_c, const FlowSizeDistribution& d, const NetworkConfig& c) {
  if (k_c < 0) throw ValidationError("k_c", "must be >= 0");
  const double cost = cache_cost_per_bit(d, c);
  if (!(large_bits > 0)) return 0.0;
  if (k_c == 0) throw ValidationError("k_c", "large traffic but no demand-aware switch");
  return large_bits / k_c * cost;
}

/// Diagnostic upper bound with every large flow at exactly |l|.
inline double dct_cache_worst_case(double large_bits, int k_c, const NetworkConfig& c) {
  if (!(large_bits > 0)) return 0.0;
  if (k_c < 1) throw ValidationError("k_c", "large traffic but no demand-aware switch");
  return large_bits / k_c * cache_cost_per_bit_worst(c);
}

struct Split {
  int k_r = 0;
  int k_c = 0;
  double real_ratio = 0;  // k_c / k_r before rounding; +inf when no medium mass
  bool operator==(const Split& o) const { return k_r == o.k_r && k_c == o.k_c; }
};

/// max(rotor DCT of the medium bytes, cache DCT of the large bytes) for a
/// given split; the quantity the rounding of the optimal split minimises.
inline double split_objective(const traffic::ClassRates& u, double phi_m, double cache_cost, int k_r, int k_c,
                              const NetworkConfig& c) {
  double rot = dct_rotor_component(u.medium_bps, phi_m, k_r, c);
  double cache = 0.0;
  if (u.large_bps > 0) cache = k_c < 1 ? std::numeric_limits<double>::infinity() : u.large_bps / k_c * cache_cost;
  return std::max(rot, cache);
}

/// Rotor / demand-aware split of the k - k_s non-static switches that
/// equalises the two component DCTs:
///
///   k_c/k_r = U(x,l) / (U(x,m)/|m|) * (E[R_c/|f|] + 1/r) / ((2 - phi_m)(R_r + delta))
///
/// The real ratio is rounded to the neighbouring integer split with the
/// smaller max-component DCT; ties go to more rotor switches. The ratio does
/// not depend on x, so the class byte fractions are taken at full load.
inline Split optimal_split(const FlowSizeDistribution& d, double x, double phi_m, const NetworkConfig& c) {
  detail::check_unit(x, "x");
  detail::check_unit(phi_m, "phi_m");
  const int total = c.k_r + c.k_c;
  if (total < 2) throw ValidationError("k", "need k - k_s >= 2 switches to split");
  const auto u = traffic::class_rates(d, 1.0, c);
  if (!(u.large_bps > 0)) return {total, 0, 0.0};
  if (!(u.medium_bps > 0)) return {0, total, std::numeric_limits<double>::infinity()};

  const double cost = cache_cost_per_bit(d, c);
  const double ratio = u.large_bps / (u.medium_bps / c.medium_bits()) * cost /
                       ((2.0 - phi_m) * (c.rotor_reconfig_s + c.slot_s));
  const double kc_real = total * ratio / (1.0 + ratio);
  const int lo = std::clamp(static_cast<int>(std::floor(kc_real)), 1, total - 1);
  const int hi = std::clamp(static_cast<int>(std::ceil(kc_real)), 1, total - 1);
  const double f_lo = split_objective(u, phi_m, cost, total - lo, lo, c);
  const double f_hi = split_objective(u, phi_m, cost, total - hi, hi, c);
  // Fewer demand-aware switches (more rotor) wins ties.
  const int kc = f_hi < f_lo ? hi : lo;
  return {total - kc, kc, ratio};
}

/// Hybrid DCT under U(x): the maximum of the three component DCTs.
/// Small flows use the k_s-switch expander (path length `epl_static`),
/// medium flows the k_r rotor switches, large flows the k_c demand-aware
/// switches. A class whose plane is absent falls back to the rotor plane.
struct HybridBreakdown {
  double expander_s = 0;
  double rotor_s = 0;
  double cache_s = 0;
  double dct_s() const { return std::max({expander_s, rotor_s, cache_s}); }
};

inline HybridBreakdown hybrid_components(double x, const FlowSizeDistribution& d, double phi_m, int k_r, int k_c,
                                         const NetworkConfig& c, double epl_static) {
  detail::check_unit(x, "x");
  const auto u = traffic::class_rates(d, x, c);
  HybridBreakdown b;
  double rotor_bits = u.medium_bps;
  if (u.small_bps > 0) {
    if (c.k_s > 0) {
      if (!(epl_static >= 1.0)) throw ValidationError("epl", "expected path length must be >= 1");
      b.expander_s = u.small_bps * epl_static / (c.k_s * c.rate_bps);
    } else {
      rotor_bits += u.small_bps;
    }
  }
  if (u.large_bps > 0) {
    if (k_c > 0)
      b.cache_s = dct_cache(u.large_bps, k_c, d, c);
    else
      rotor_bits += u.large_bps;
  }
  b.rotor_s = dct_rotor_component(rotor_bits, phi_m, k_r, c);
  return b;
}

inline double dct_hybrid_uniform(double x, const FlowSizeDistribution& d, double phi_m, const NetworkConfig& c,
                                 double epl_static, std::optional<Split> split = std::nullopt) {
  const Split s = split ? *split : optimal_split(d, x, phi_m, c);
  return hybrid_components(x, d, phi_m, s.k_r, s.k_c, c, epl_static).dct_s();
}

/// Hybrid slope coefficient alpha = U(x,l)/k_c* * (E[R_c/|f|] + 1/r), with
/// U taken at the given x. Zero without large traffic.
inline double alpha(double x, const FlowSizeDistribution& d, int k_c, const NetworkConfig& c) {
  const auto u = traffic::class_rates(d, x, c);
  if (!(u.large_bps > 0)) return 0.0;
  return dct_cache(u.large_bps, k_c, d, c);
}

/// The hybrid upper bound in its printed form, x * alpha(x). Since alpha(x)
/// already scales with x this grows as x^2.
inline double hybrid_bound_printed(double x, const FlowSizeDistribution& d, int k_c, const NetworkConfig& c) {
  return x * alpha(x, d, k_c, c);
}

/// The hybrid upper bound read as linear in x: x * alpha(1), which equals
/// the demand-aware component DCT U(x,l)/k_c * (E[R_c/|f|] + 1/r).
inline double hybrid_bound_linear(double x, const FlowSizeDistribution& d, int k_c, const NetworkConfig& c) {
  return x * alpha(1.0, d, k_c, c);
}

/// beta = (2 - phi)(R_r + delta)/delta.
inline double beta(double phi, const NetworkConfig& c) { return (2.0 - phi) * rotor_period_factor(c); }

/// z = k_c / (U(1,l) * (E[R_c/|f|] + 1/r)): the fraction of a fully loaded
/// ToR's large bytes the demand-aware switches drain in one second.
inline double cache_capacity_z(int k_c, const FlowSizeDistribution& d, const NetworkConfig& c) {
  if (k_c < 0) throw ValidationError("k_c", "must be >= 0");
  const auto u = traffic::class_rates(d, 1.0, c);
  const double cost = cache_cost_per_bit(d, c);
  if (k_c == 0) return 0.0;
  return k_c / (u.large_bps * cost);
}

/// x* = max((L - z)/L, 0): fraction of large bytes spilled to the rotor plane.
inline double spill_fraction(double L, double z) {
  if (!(L > 0)) throw ValidationError("L", "must be > 0");
  if (!(z >= 0)) throw ValidationError("z", "must be >= 0");
  return std::max((L - z) / L, 0.0);
}

enum class System { expander, rotor, hybrid };

inline std::string_view to_string(System s) {
  switch (s) {
    case System::expander: return "expander";
    case System::rotor: return "rotor";
    case System::hybrid: return "hybrid";
  }
  return "?";
}

struct ThroughputInputs {
  double phi = 1.0;          // skewness of the active-set traffic
  double epl = 1.0;          // expander path length, expander system only
  std::optional<FlowSizeDistribution> distribution;  // hybrid only
};

struct BisectionResult {
  double L = 1.0;
  double residual = 0.0;  // DCT(L) - 1
  int iterations = 0;
};

/// Hybrid DCT under S_L(x): x*L*((U(1,m) + x*(L) U(1,l))/|m|)(2 - phi x)(R_r+delta)/k_r.
inline double hybrid_skewed_dct(double L, double x, double phi, const traffic::ClassRates& u1, double z,
                                const NetworkConfig& c) {
  const double spill = spill_fraction(L, z);
  const double rotor_bits = u1.medium_bps + spill * u1.large_bps;
  if (!(rotor_bits > 0)) return 0.0;
  if (c.k_r < 1) return std::numeric_limits<double>::infinity();
  return x * L * rotor_bits / c.medium_bits() * (2.0 - phi * x) * (c.rotor_reconfig_s + c.slot_s) / c.k_r;
}

/// DCTs under S_L(x): ceil(x n) active ToRs at per-ToR load L. Pure
/// expander x*L*epl, pure rotor x*L*(2 - phi x)(R_r+delta)/delta.
inline double dct_expander_skewed(double L, double x, double epl) {
  detail::check_unit(L, "L");
  return L * dct_expander(x, epl);
}

inline double dct_rotor_skewed(double L, double x, double phi, const NetworkConfig& c) {
  detail::check_unit(L, "L");
  detail::check_unit(x, "x");
  detail::check_unit(phi, "phi");
  return x * L * (2.0 - phi * x) * rotor_period_factor(c);
}

/// Hybrid components under S_L(x). Large bytes beyond the cache capacity z
/// spill to the rotor plane, so the demand-aware term never exceeds 1.
/// Classes without their plane go to the rotor plane, as in the uniform case.
inline HybridBreakdown hybrid_components_skewed(double L, double x, const FlowSizeDistribution& d, double phi_m,
                                                const NetworkConfig& c, double epl_static) {
  detail::check_unit(L, "L");
  detail::check_unit(x, "x");
  detail::check_unit(phi_m, "phi_m");
  const auto u1 = traffic::class_rates(d, 1.0, c);
  HybridBreakdown b;
  double rotor_bits = u1.medium_bps;
  if (u1.small_bps > 0) {
    if (c.k_s > 0) {
      if (!(epl_static >= 1.0)) throw ValidationError("epl", "expected path length must be >= 1");
      b.expander_s = x * L * u1.small_bps * epl_static / (c.k_s * c.rate_bps);
    } else {
      rotor_bits += u1.small_bps;
    }
  }
  if (u1.large_bps > 0) {
    const double z = cache_capacity_z(c.k_c, d, c);
    const double spill = L > 0 ? spill_fraction(L, z) : 0.0;
    rotor_bits += spill * u1.large_bps;
    if (c.k_c > 0) b.cache_s = L * (1.0 - spill) * u1.large_bps * cache_cost_per_bit(d, c) / c.k_c;
  }
  if (rotor_bits > 0)
    b.rotor_s = c.k_r < 1 ? std::numeric_limits<double>::infinity()
                          : x * L * rotor_bits / c.medium_bits() * (2.0 - phi_m * x) *
                                (c.rotor_reconfig_s + c.slot_s) / c.k_r;
  return b;
}

/// Largest L in [0, 1] with hybrid DCT(S_L(x)) <= 1, by bisection. The DCT is
/// nondecreasing in L, so the bracket [0, 1] is valid whenever DCT(1) > 1.
inline BisectionResult solve_hybrid_throughput(double x, double phi, const FlowSizeDistribution& d,
                                               const NetworkConfig& c, double tol = 1e-6, int max_iter = 60) {
  const auto u1 = traffic::class_rates(d, 1.0, c);
  const double z = u1.large_bps > 0 ? cache_capacity_z(c.k_c, d, c) : 0.0;
  // Small flows ride the expander and are not part of the rotor demand.
  const auto f = [&](double L) { return hybrid_skewed_dct(L, x, phi, u1, z, c) - 1.0; };
  // Without rotor switches medium bytes have nowhere to go: no load fits.
  if (c.k_r < 1) return {u1.medium_bps > 0 ? 0.0 : std::min(1.0, z), 0.0, 0};
  BisectionResult r;
  r.residual = f(1.0);
  if (r.residual <= 0) return r;
  double lo = 0.0, hi = 1.0;
  double flo = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm <= 0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    r.iterations = it;
    if (hi - lo <= tol && std::abs(flo) <= tol) break;
  }
  r.L = lo;
  r.residual = flo;
  if (!(hi - lo <= tol) || !(std::abs(flo) <= tol) || !(lo > 0))
    throw SimulationError("hybrid throughput bisection did not converge: residual " + csv::format_double(flo));
  return r;
}

/// L*(x) for skewed traffic: the largest per-active-ToR load with DCT <= 1.
inline double throughput_star(System sys, double x, const ThroughputInputs& in, const NetworkConfig& c) {
  if (!(x > 0.0 && x <= 1.0)) throw ValidationError("x", "must lie in (0, 1]");
  switch (sys) {
    case System::expander: {
      if (!(in.epl >= 1.0)) throw ValidationError("epl", "expected path length must be >= 1");
      return std::min(1.0 / (x * in.epl), 1.0);
    }
    case System::rotor: {
      detail::check_unit(in.phi, "phi");
      return std::min(1.0 / (x * (2.0 - in.phi * x) * rotor_period_factor(c)), 1.0);
    }
    case System::hybrid: {
      detail::check_unit(in.phi, "phi");
      if (!in.distribution) throw ValidationError("distribution", "hybrid throughput needs a flow-size distribution");
      return solve_hybrid_throughput(x, in.phi, *in.distribution, c).L;
    }
  }
  return 0.0;
}

/// Everything the analytic model says about one operating point.
struct AnalyticsReport {
  double x = 0;
  double phi = 1;
  double phi_m = 1;
  double dct_expander_s = 0;
  double dct_rotor_s = 0;
  double dct_hybrid_s = 0;
  double alpha = 0;
  double beta = 0;
  double gamma = 0;
  int k_r_star = 0;
  int k_c_star = 0;
  double large_threshold_bits = 0;
  double z = 0;
  double x_star = 0;
  double L_star_expander = 1;
  double L_star_rotor = 1;
  double L_star_hybrid = 1;
};

struct ReportInputs {
  double x = 0.5;
  double phi = 1.0;
  double phi_m = 1.0;
  double epl_full = 1.0;    // expander over all k switches
  double epl_static = 1.0;  // expander over the k_s static switches
  FlowSizeDistribution distribution = FlowSizeDistribution::log_uniform(1e6, 64e6);
};

/// Fills every report field. DCTs use the uniform model at load x, L* the
/// skewed model with an active fraction x. The hybrid network is evaluated
/// with the optimal split.
inline AnalyticsReport analyze(const ReportInputs& in, const NetworkConfig& c) {
  AnalyticsReport r;
  r.x = in.x;
  r.phi = in.phi;
  r.phi_m = in.phi_m;
  r.gamma = in.epl_full;
  r.beta = beta(in.phi, c);
  r.dct_expander_s = dct_expander(in.x, in.epl_full);
  r.dct_rotor_s = dct_rotor(in.x, in.phi, c);
  const Split s = optimal_split(in.distribution, in.x, in.phi_m, c);
  r.k_r_star = s.k_r;
  r.k_c_star = s.k_c;
  r.dct_hybrid_s = dct_hybrid_uniform(in.x, in.distribution, in.phi_m, c, in.epl_static, s);
  const auto u1 = traffic::class_rates(in.distribution, 1.0, c);
  const bool has_large = u1.large_bps > 0;
  r.alpha = has_large && s.k_c > 0 ? alpha(in.x, in.distribution, s.k_c, c) : 0.0;
  try {
    r.large_threshold_bits = large_flow_threshold(in.phi, c);
  } catch (const ThresholdError&) {
    r.large_threshold_bits = std::numeric_limits<double>::infinity();
  }
  NetworkConfig split_cfg = c;
  split_cfg.k_r = s.k_r;
  split_cfg.k_c = s.k_c;
  r.z = has_large ? cache_capacity_z(s.k_c, in.distribution, c) : 0.0;
  if (in.x > 0) {
    r.L_star_expander = throughput_star(System::expander, in.x, {in.phi, in.epl_full, std::nullopt}, c);
    r.L_star_rotor = throughput_star(System::rotor, in.x, {in.phi, in.epl_full, std::nullopt}, c);
    r.L_star_hybrid = throughput_star(System::hybrid, in.x, {in.phi, in.epl_full, in.distribution}, split_cfg);
    r.x_star = has_large ? spill_fraction(r.L_star_hybrid, r.z) : 0.0;
  }
  return r;
}

}  // namespace tmt::analytics
