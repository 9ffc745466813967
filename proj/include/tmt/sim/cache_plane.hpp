#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "tmt/model.hpp"

namespace tmt::sim {

/// k_c demand-aware switches. A flow is served by building a direct circuit
/// src->dst on one switch: the circuit is dark for R_c while it is set up,
/// then carries the flow at rate r, single hop. Ports are claimed in
/// assignment order (FIFO): a flow takes the switch on which both its input
/// and output port free up first.
class CachePlane {
 public:
  struct Reservation {
    std::uint32_t flow = 0;
    int sw = -1;
    TorId src = 0;
    TorId dst = 0;
    std::uint64_t bits = 0;
    double reconfig_start_s = 0;
    double tx_start_s = 0;
    double finish_s = 0;
  };

  struct Stats {
    std::uint64_t flows = 0;
    std::uint64_t bits = 0;
    double busy_port_s = 0;  // reconfiguration + transmission, per input port
    std::uint64_t port_overlaps = 0;  // audit: must stay 0
  };

  explicit CachePlane(const NetworkConfig& c)
      : n_(c.n),
        k_c_(c.k_c),
        reconfig_s_(c.cache_reconfig_s),
        rate_(c.rate_bps),
        in_free_(static_cast<std::size_t>(c.k_c) * c.n, 0.0),
        out_free_(static_cast<std::size_t>(c.k_c) * c.n, 0.0) {
    if (k_c_ < 1) throw ValidationError("k_c", "cache plane needs at least one switch");
  }

  int switches() const { return k_c_; }

  /// Earliest reservation for a flow released at `now`.
  Reservation plan(std::uint32_t flow, TorId src, TorId dst, std::uint64_t bits, double now) const {
    Reservation r;
    r.flow = flow;
    r.src = src;
    r.dst = dst;
    r.bits = bits;
    double best = std::numeric_limits<double>::infinity();
    for (int sw = 0; sw < k_c_; ++sw) {
      const double start = std::max({now, in_free_[at(sw, src)], out_free_[at(sw, dst)]});
      if (start < best) {
        best = start;
        r.sw = sw;
      }
    }
    r.reconfig_start_s = best;
    r.tx_start_s = best + reconfig_s_;
    r.finish_s = r.tx_start_s + static_cast<double>(bits) / rate_;
    return r;
  }

  /// True when some switch has both ports idle at `now`.
  bool ports_free_now(TorId src, TorId dst, double now) const {
    for (int sw = 0; sw < k_c_; ++sw)
      if (in_free_[at(sw, src)] <= now && out_free_[at(sw, dst)] <= now) return true;
    return false;
  }

  void commit(const Reservation& r) {
    auto& in = in_free_[at(r.sw, r.src)];
    auto& out = out_free_[at(r.sw, r.dst)];
    if (in > r.reconfig_start_s || out > r.reconfig_start_s) ++stats_.port_overlaps;
    in = r.finish_s;
    out = r.finish_s;
    ++stats_.flows;
    stats_.bits += r.bits;
    stats_.busy_port_s += r.finish_s - r.reconfig_start_s;
  }

  /// Bits a reservation has put on the wire by time t; zero while the
  /// circuit is being set up.
  static double transmitted_bits(const Reservation& r, double t, double rate) {
    if (t <= r.tx_start_s) return 0.0;
    if (t >= r.finish_s) return static_cast<double>(r.bits);
    return (t - r.tx_start_s) * rate;
  }

  const Stats& stats() const { return stats_; }
  double rate() const { return rate_; }

 private:
  std::size_t at(int sw, TorId port) const { return static_cast<std::size_t>(sw) * n_ + port; }

  int n_;
  int k_c_;
  double reconfig_s_;
  double rate_;
  std::vector<double> in_free_;
  std::vector<double> out_free_;
  Stats stats_;
};

}  // namespace tmt::sim
