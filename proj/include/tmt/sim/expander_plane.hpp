#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "tmt/sim/ledger.hpp"
#include "tmt/topology.hpp"

namespace tmt::sim {

/// Fluid service of small flows over the static expander. Each flow follows
/// one shortest path; a directed ToR pair joined by m parallel static links
/// has capacity m*r. Rates are max-min fair (progressive filling) and are
/// recomputed whenever the active set changes.
class ExpanderPlane {
 public:
  struct Stats {
    std::uint64_t flows = 0;
    double link_bits = 0;           // bits times hops
    double max_link_utilisation = 0;  // audit: must stay <= 1
  };

  ExpanderPlane(const topology::ExpanderGraph& g, double rate_bps, FlowLedger& ledger)
      : g_(g), rate_(rate_bps), ledger_(ledger), capacity_(g.distinct_edge_count()) {
    for (std::size_t e = 0; e < capacity_.size(); ++e) capacity_[e] = g.edge_multiplicity(e) * rate_;
  }

  void add(std::uint32_t flow, const std::vector<TorId>& path, std::uint64_t bits) {
    Active a;
    a.flow = flow;
    a.size = bits;
    a.remaining = static_cast<double>(bits);
    for (std::size_t h = 0; h + 1 < path.size(); ++h) {
      auto e = g_.edge_id(path[h], path[h + 1]);
      if (e < 0) throw TopologyError("path uses a missing edge");
      a.links.push_back(static_cast<std::size_t>(e));
    }
    if (a.links.empty()) throw TopologyError("expander flow needs at least one hop");
    pending_bits_ += bits;
    ++stats_.flows;
    active_.push_back(std::move(a));
    dirty_ = true;
  }

  bool idle() const { return active_.empty(); }
  bool dirty() const { return dirty_; }
  std::size_t active_count() const { return active_.size(); }
  /// Full size of every flow still in the plane.
  std::uint64_t pending_bits() const { return pending_bits_; }
  const Stats& stats() const { return stats_; }

  /// Drains every active flow at its current rate up to time t; flows that
  /// finish are reported to the ledger at t.
  void advance_to(double t) {
    const double dt = t - clock_;
    if (dt > 0) {
      for (auto& a : active_) {
        const double moved = std::min(a.remaining, a.rate * dt);
        a.remaining -= moved;
        stats_.link_bits += moved * static_cast<double>(a.links.size());
      }
    }
    clock_ = std::max(clock_, t);
    std::size_t w = 0;
    for (std::size_t i = 0; i < active_.size(); ++i) {
      auto& a = active_[i];
      if (a.remaining <= 1e-9 * static_cast<double>(a.size) + 1e-6) {
        ledger_.deliver(a.flow, a.size, clock_, static_cast<int>(a.links.size()));
        pending_bits_ -= a.size;
        dirty_ = true;
      } else {
        if (w != i) active_[w] = std::move(a);
        ++w;
      }
    }
    active_.resize(w);
  }

  /// Max-min fair rates by progressive filling.
  void recompute_rates() {
    dirty_ = false;
    if (active_.empty()) return;
    std::vector<double> left(capacity_);
    std::vector<std::uint32_t> unfrozen(capacity_.size(), 0);
    for (auto& a : active_) {
      a.rate = -1;
      for (auto e : a.links) ++unfrozen[e];
    }
    std::size_t remaining = active_.size();
    while (remaining > 0) {
      double share = std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < left.size(); ++e)
        if (unfrozen[e] > 0) share = std::min(share, left[e] / unfrozen[e]);
      // Freeze every flow crossing a link whose fair share is the bottleneck.
      for (auto& a : active_) {
        if (a.rate >= 0) continue;
        bool bottlenecked = false;
        for (auto e : a.links)
          if (left[e] / unfrozen[e] <= share * (1 + 1e-12)) {
            bottlenecked = true;
            break;
          }
        if (!bottlenecked) continue;
        a.rate = share;
        --remaining;
        for (auto e : a.links) {
          left[e] -= share;
          --unfrozen[e];
        }
      }
    }
    // Audit the allocation.
    std::vector<double> load(capacity_.size(), 0.0);
    for (const auto& a : active_)
      for (auto e : a.links) load[e] += a.rate;
    for (std::size_t e = 0; e < load.size(); ++e)
      stats_.max_link_utilisation = std::max(stats_.max_link_utilisation, load[e] / capacity_[e]);
  }

  /// Absolute time at which the next active flow finishes at current rates.
  double next_completion() const {
    double t = std::numeric_limits<double>::infinity();
    for (const auto& a : active_)
      if (a.rate > 0) t = std::min(t, clock_ + a.remaining / a.rate);
    return t;
  }

  double rate_of(std::uint32_t flow) const {
    for (const auto& a : active_)
      if (a.flow == flow) return a.rate;
    return 0.0;
  }

 private:
  struct Active {
    std::uint32_t flow = 0;
    std::uint64_t size = 0;
    double remaining = 0;
    double rate = 0;
    std::vector<std::size_t> links;
  };

  const topology::ExpanderGraph& g_;
  double rate_;
  FlowLedger& ledger_;
  std::vector<double> capacity_;
  std::vector<Active> active_;
  std::uint64_t pending_bits_ = 0;
  double clock_ = 0;
  bool dirty_ = false;
  Stats stats_;
};

}  // namespace tmt::sim
