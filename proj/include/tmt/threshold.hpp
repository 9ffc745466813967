#pragma once

#include "tmt/error.hpp"

namespace tmt {

/// Smallest flow size (bits) that finishes sooner on a freshly configured
/// demand-aware circuit than on the rotor plane, for traffic whose one-hop
/// fraction is `phi`:
///
///   |l| = Rc * |m| * r / ((2 - phi) * r * (Rr + delta) - |m|)
///
/// Throws ThresholdError when the denominator is not positive (the rotor
/// plane wins for every size).
inline double large_threshold_bits(double phi, double rate_bps, double medium_bits,
                                   double rotor_reconfig_s, double slot_s,
                                   double cache_reconfig_s) {
  const double denom = (2.0 - phi) * rate_bps * (rotor_reconfig_s + slot_s) - medium_bits;
  if (!(denom > 0.0))
    throw ThresholdError(
        "rotor always faster; no finite large threshold (all flows medium)");
  return cache_reconfig_s * medium_bits * rate_bps / denom;
}

}  // namespace tmt
