#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tmt/error.hpp"
#include "tmt/threshold.hpp"
#include "tmt/units.hpp"

namespace tmt {

using TorId = std::int32_t;

enum class FlowClass : std::uint8_t { small, medium, large };

inline std::string_view to_string(FlowClass c) {
  switch (c) {
    case FlowClass::small: return "small";
    case FlowClass::medium: return "medium";
    case FlowClass::large: return "large";
  }
  return "?";
}

inline FlowClass flow_class_from_string(std::string_view s) {
  if (s == "small") return FlowClass::small;
  if (s == "medium") return FlowClass::medium;
  if (s == "large") return FlowClass::large;
  throw ValidationError("class", "unknown flow class '" + std::string(s) + "'");
}

/// Parameters of a ToR-Matching-ToR network: n ToRs, each with one uplink to
/// every spine switch, and k = k_s + k_r + k_c spine switches split between
/// static, rotor and demand-aware types. All times are seconds, all sizes are
/// bits, rates are bits/second.
struct NetworkConfig {
  int n = 256;
  int k_s = 5;
  int k_r = 16;
  int k_c = 16;
  double rate_bps = 10e9;
  double slot_s = 100e-6;             // rotor circuit-hold time
  double rotor_reconfig_s = 10e-6;
  double cache_reconfig_s = 15e-3;    // demand-aware reconfiguration
  // Filled by validate() when unset.
  std::optional<double> medium_threshold_bits;
  std::optional<double> large_threshold_bits;
  // Skewness at which the large threshold is derived when it is not given.
  double threshold_phi = 0.0;

  int k() const { return k_s + k_r + k_c; }

  double medium_bits() const {
    if (!medium_threshold_bits) throw ValidationError("medium_threshold_bits", "unset; call validate()");
    return *medium_threshold_bits;
  }
  double large_bits() const {
    if (!large_threshold_bits) throw ValidationError("large_threshold_bits", "unset; call validate()");
    return *large_threshold_bits;
  }
  /// Bits one rotor circuit carries in a slot.
  double slot_bits() const { return slot_s * rate_bps; }
  double slot_period_s() const { return slot_s + rotor_reconfig_s; }

  bool operator==(const NetworkConfig&) const = default;
};

/// A validated configuration plus the non-fatal advisories raised while
/// checking it.
struct ValidatedConfig {
  NetworkConfig config;
  std::vector<std::string> warnings;
};

inline ValidatedConfig validate_with_warnings(NetworkConfig c) {
  ValidatedConfig out;
  if (c.n < 2) throw ValidationError("n", "need at least 2 ToRs");
  if (c.k_s < 0) throw ValidationError("k_s", "must be >= 0");
  if (c.k_r < 0) throw ValidationError("k_r", "must be >= 0");
  if (c.k_c < 0) throw ValidationError("k_c", "must be >= 0");
  if (c.k() < 1) throw ValidationError("k", "k >= 1 required (k_s + k_r + k_c)");
  if (!(c.rate_bps > 0) || !std::isfinite(c.rate_bps)) throw ValidationError("rate_bps", "must be > 0");
  if (!(c.slot_s > 0) || !std::isfinite(c.slot_s)) throw ValidationError("slot_s", "must be > 0");
  if (!(c.rotor_reconfig_s >= 0)) throw ValidationError("rotor_reconfig_s", "must be >= 0");
  if (!(c.cache_reconfig_s >= 0)) throw ValidationError("cache_reconfig_s", "must be >= 0");
  if (c.rotor_reconfig_s > c.cache_reconfig_s)
    throw ValidationError("rotor_reconfig_s", "rotor reconfiguration must not exceed demand-aware reconfiguration");
  if (c.rotor_reconfig_s * 10.0 > c.cache_reconfig_s)
    out.warnings.push_back("rotor reconfiguration time is not much smaller than demand-aware reconfiguration time");
  if (!(c.threshold_phi >= 0.0 && c.threshold_phi <= 1.0))
    throw ValidationError("threshold_phi", "must lie in [0, 1]");

  if (!c.medium_threshold_bits) c.medium_threshold_bits = c.slot_s * c.rate_bps;
  if (!(*c.medium_threshold_bits > 0)) throw ValidationError("medium_threshold_bits", "must be > 0");

  if (!c.large_threshold_bits) {
    c.large_threshold_bits = large_threshold_bits(c.threshold_phi, c.rate_bps, *c.medium_threshold_bits,
                                                  c.rotor_reconfig_s, c.slot_s, c.cache_reconfig_s);
  }
  if (!(*c.large_threshold_bits > *c.medium_threshold_bits))
    throw ValidationError("large_threshold_bits", "must exceed the medium threshold");
  out.config = c;
  return out;
}

/// Checks every invariant and fills derived defaults: |m| = delta * r and |l|
/// from the threshold formula at `threshold_phi`.
inline NetworkConfig validate(NetworkConfig c) { return validate_with_warnings(std::move(c)).config; }

/// Half-open classes: [0,|m|) small, [|m|,|l|) medium, [|l|,inf) large.
inline FlowClass class_of(double size_bits, const NetworkConfig& c) {
  if (!(size_bits > 0)) throw ValidationError("size_bits", "flow size must be > 0");
  if (size_bits < c.medium_bits()) return FlowClass::small;
  if (size_bits < c.large_bits()) return FlowClass::medium;
  return FlowClass::large;
}

enum class MatchingFamily : std::uint8_t { single_fixed, rotor_cycle, unconstrained };

/// Switch model (m, M, S, R). The demand-aware family has n! matchings; that
/// count is carried by the family tag and `matching_count` is left empty.
struct SwitchSpec {
  MatchingFamily family;
  std::optional<std::uint64_t> matching_count;
  double hold_time_s;  // +inf for static switches
  double reconfig_time_s;

  static SwitchSpec static_switch() {
    return {MatchingFamily::single_fixed, 1, std::numeric_limits<double>::infinity(), 0.0};
  }
  static SwitchSpec rotor(const NetworkConfig& c) {
    return {MatchingFamily::rotor_cycle, static_cast<std::uint64_t>(c.n - 1), c.slot_s, c.rotor_reconfig_s};
  }
  static SwitchSpec demand_aware(const NetworkConfig& c, double hold_time_s) {
    return {MatchingFamily::unconstrained, std::nullopt, hold_time_s, c.cache_reconfig_s};
  }
};

struct Flow {
  TorId src = 0;
  TorId dst = 0;
  std::uint64_t size_bits = 0;
  double arrival_s = 0.0;
  FlowClass cls = FlowClass::small;

  bool operator==(const Flow&) const = default;
};

inline void check_flow(const Flow& f, const NetworkConfig& c) {
  if (f.src < 0 || f.src >= c.n) throw ValidationError("src", "ToR index out of range");
  if (f.dst < 0 || f.dst >= c.n) throw ValidationError("dst", "ToR index out of range");
  if (f.src == f.dst) throw ValidationError("dst", "source equals destination");
  if (f.size_bits == 0) throw ValidationError("size_bits", "flow size must be > 0");
  if (class_of(static_cast<double>(f.size_bits), c) != f.cls)
    throw ValidationError("class", "class inconsistent with thresholds");
}

/// Named parameter sets. `paper-numeric` uses 10 Gbps links, the rate every
/// worked number is derived with; `paper-table1` uses the 40 Gbps headline
/// rate. Both have n=256, k=(5,16,16), delta=100us, Rr=10us, Rc=15ms.
inline NetworkConfig profile(std::string_view name) {
  NetworkConfig c;
  if (name == "paper-numeric") {
    c.rate_bps = units::gbps_to_bps(10);
  } else if (name == "paper-table1") {
    c.rate_bps = units::gbps_to_bps(40);
  } else {
    throw ValidationError("profile", "unknown profile '" + std::string(name) + "'");
  }
  return c;
}

inline std::vector<std::string> profile_names() { return {"paper-numeric", "paper-table1"}; }

}  // namespace tmt
