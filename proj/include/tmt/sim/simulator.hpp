#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tmt/csv.hpp"
#include "tmt/model.hpp"
#include "tmt/sim/cache_plane.hpp"
#include "tmt/sim/expander_plane.hpp"
#include "tmt/sim/ledger.hpp"
#include "tmt/sim/rotor_plane.hpp"
#include "tmt/topology.hpp"

namespace tmt::sim {

/// When flows enter the network.
enum class Injection {
  batch,   // the whole window's demand is released at the window start
  online,  // each flow is released at its arrival time
};

/// When a large flow goes to the demand-aware plane.
enum class CacheAdmission {
  horizon,    // if its circuit finishes within `cache_horizon_s` of release
  immediate,  // only if a switch has both ports idle at release
  balanced,   // as horizon, and no later than the rotor plane would finish it
};

struct SimOptions {
  Injection injection = Injection::batch;
  CacheAdmission admission = CacheAdmission::balanced;
  double cache_horizon_s = std::numeric_limits<double>::infinity();
  double cutoff_s = 100.0;  // give up (did-not-complete) past this time
  std::uint64_t seed = 1;   // expander construction and path choice
  bool audit = true;        // check bit conservation after every event

  bool operator==(const SimOptions&) const = default;
};

struct FlowRecord {
  std::size_t flow_id = 0;
  double arrival_s = 0;
  double release_s = 0;
  double completion_s = std::numeric_limits<double>::quiet_NaN();
  Plane plane = Plane::rotor;
  int hops = 0;
  bool completed = false;
};

struct PlaneSummary {
  std::uint64_t flows = 0;
  std::uint64_t bits = 0;
  double link_bits = 0;
  double utilisation = 0;
};

struct Audit {
  std::uint64_t events = 0;
  std::uint64_t conservation_checks = 0;
  std::uint64_t conservation_violations = 0;
  std::uint64_t rotor_max_link_bits = 0;   // per circuit per slot
  std::uint64_t rotor_slot_capacity_bits = 0;
  std::uint64_t cache_port_overlaps = 0;
  double expander_max_link_utilisation = 0;
};

struct SimResult {
  double dct_s = 0;
  bool completed = true;
  std::vector<FlowRecord> flows;
  std::size_t spill_count = 0;  // large flows served by the rotor plane
  PlaneSummary expander, cache, rotor;
  Audit audit;
};

/// Flow-level discrete-event simulation of a (k_s, k_r, k_c) network.
///
/// Flow assignment: small flows to the static expander, medium flows to the
/// rotor plane, large flows to the demand-aware plane when admitted and to
/// the rotor plane otherwise. When a plane is absent a class falls back in
/// the order rotor, expander, demand-aware.
class Simulator {
 public:
  Simulator(NetworkConfig c, SimOptions opt = {}) : cfg_(validate(std::move(c))), opt_(opt) {
    if (cfg_.k_s > 0) graph_.emplace(topology::build_expander(cfg_.n, cfg_.k_s, opt_.seed));
    reset(0);
  }

  Simulator(NetworkConfig c, SimOptions opt, topology::ExpanderGraph graph)
      : cfg_(validate(std::move(c))), opt_(opt), graph_(std::move(graph)) {
    if (cfg_.k_s > 0 && (graph_->node_count() != cfg_.n || graph_->degree() != cfg_.k_s))
      throw ValidationError("expander", "graph does not match (n, k_s)");
    reset(0);
  }

  // Planes hold references into the simulator.
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  const NetworkConfig& config() const { return cfg_; }
  const SimOptions& options() const { return opt_; }
  const std::optional<topology::ExpanderGraph>& expander_graph() const { return graph_; }

  /// Plane a flow released at `now` would be sent to under the current
  /// state (no side effects).
  Plane assign(const Flow& f, double now) const {
    switch (f.cls) {
      case FlowClass::small:
        if (expander_) return Plane::expander;
        if (rotor_) return Plane::rotor;
        return Plane::cache;
      case FlowClass::medium:
        if (rotor_) return Plane::rotor;
        if (expander_) return Plane::expander;
        return Plane::cache;
      case FlowClass::large:
        if (cache_ && (!rotor_ || admits(f, now))) return Plane::cache;
        if (rotor_) return Plane::rotor;
        return Plane::expander;
    }
    return Plane::rotor;
  }

  SimResult run(std::span<const Flow> flows) {
    reset(flows.size());
    for (const auto& f : flows) check_flow(f, cfg_);
    if (flows.size() > std::numeric_limits<std::uint32_t>::max()) throw SimulationError("too many flows");

    std::vector<double> release(flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i) {
      release[i] = opt_.injection == Injection::batch ? 0.0 : flows[i].arrival_s;
      push({release[i], flows[i].cls == FlowClass::large ? EventKind::release_large : EventKind::release, i});
    }

    bool completed = true;
    while (!events_.empty()) {
      const Event ev = events_.top();
      events_.pop();
      if (ev.t > opt_.cutoff_s) {
        completed = false;
        break;
      }
      if (expander_) expander_->advance_to(ev.t);
      handle(ev, flows);
      // Rates only matter once time moves, so events sharing a timestamp
      // share one recomputation.
      const bool same_instant = !events_.empty() && events_.top().t == ev.t;
      if (expander_ && expander_->dirty() && !same_instant) {
        expander_->recompute_rates();
        const double next = expander_->next_completion();
        ++expander_version_;
        if (std::isfinite(next)) push({next, EventKind::expander_tick, expander_version_});
      }
      ++audit_.events;
      if (opt_.audit) check_conservation();
    }
    if (ledger_.done_count() != flows.size()) completed = false;
    return collect(flows, release, completed);
  }

 private:
  // Order of events sharing a timestamp. Large flows are released after the
  // rest so cache admission sees the rotor backlog of the same instant.
  enum class EventKind : std::uint8_t {
    cache_finish = 0,
    expander_tick = 1,
    release = 2,
    release_large = 3,
    rotor_slot = 4,
  };

  struct Event {
    double t;
    EventKind kind;
    std::uint64_t payload;
    std::uint64_t seq = 0;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.t != b.t) return a.t > b.t;
      if (a.kind != b.kind) return a.kind > b.kind;
      return a.seq > b.seq;
    }
  };

  void push(Event e) {
    e.seq = seq_++;
    events_.push(e);
  }

  void reset(std::size_t flow_count) {
    ledger_ = FlowLedger(flow_count);
    events_ = {};
    seq_ = 0;
    rotor_.reset();
    cache_.reset();
    expander_.reset();
    if (cfg_.k_r > 0) rotor_ = std::make_unique<RotorPlane>(cfg_, ledger_);
    if (cfg_.k_c > 0) cache_ = std::make_unique<CachePlane>(cfg_);
    if (cfg_.k_s > 0) {
      expander_ = std::make_unique<ExpanderPlane>(*graph_, cfg_.rate_bps, ledger_);
      paths_ = std::make_unique<topology::ShortestPathSampler>(*graph_);
    }
    path_rng_.seed(opt_.seed ^ 0x9E3779B97F4A7C15ULL);
    reservations_.clear();
    cache_pending_ = 0;
    plane_of_.assign(flow_count, Plane::rotor);
    rotor_pending_slot_ = -1;
    rotor_next_slot_ = 0;
    expander_version_ = 0;
    spills_ = 0;
    audit_ = {};
  }

  bool admits(const Flow& f, double now) const {
    if (opt_.admission == CacheAdmission::immediate) return cache_->ports_free_now(f.src, f.dst, now);
    const auto r = cache_->plan(0, f.src, f.dst, f.size_bits, now);
    if (r.finish_s > now + opt_.cache_horizon_s) return false;
    if (opt_.admission == CacheAdmission::balanced && rotor_) {
      // Drain estimate on the rotor plane: the busier of the source's
      // egress and the destination's ingress, with this flow added at two
      // hops since a burst to one destination is mostly relayed.
      const auto backlog = std::max(rotor_->source_backlog(f.src), rotor_->destination_backlog(f.dst));
      const double rotor_finish =
          now + static_cast<double>(backlog + 2 * f.size_bits) / rotor_->tor_capacity_bps();
      return r.finish_s <= rotor_finish;
    }
    return true;
  }

  void handle(const Event& ev, std::span<const Flow> flows) {
    switch (ev.kind) {
      case EventKind::release:
      case EventKind::release_large: {
        const auto id = static_cast<std::uint32_t>(ev.payload);
        const Flow& f = flows[id];
        const Plane p = assign(f, ev.t);
        plane_of_[id] = p;
        ledger_.inject(id, f.size_bits, p);
        if (f.cls == FlowClass::large && p == Plane::rotor && cache_) ++spills_;
        switch (p) {
          case Plane::rotor:
            rotor_->enqueue(id, f.src, f.dst, f.size_bits);
            schedule_rotor(ev.t);
            break;
          case Plane::cache: {
            auto r = cache_->plan(id, f.src, f.dst, f.size_bits, ev.t);
            cache_->commit(r);
            reservations_.push_back(r);
            cache_pending_ += r.bits;
            push({r.finish_s, EventKind::cache_finish, reservations_.size() - 1});
            break;
          }
          case Plane::expander:
            expander_->add(id, paths_->sample(f.src, f.dst, path_rng_), f.size_bits);
            break;
        }
        break;
      }
      case EventKind::rotor_slot: {
        const auto slot = static_cast<std::int64_t>(ev.payload);
        rotor_->serve_slot(slot);
        rotor_next_slot_ = slot + 1;
        rotor_pending_slot_ = -1;
        if (!rotor_->idle()) schedule_rotor(ev.t);
        break;
      }
      case EventKind::cache_finish: {
        const auto& r = reservations_[ev.payload];
        ledger_.deliver(r.flow, r.bits, r.finish_s, 1);
        cache_pending_ -= r.bits;
        break;
      }
      case EventKind::expander_tick:
        // Completions were applied by advance_to; stale ticks are no-ops.
        break;
    }
  }

  void schedule_rotor(double now) {
    if (rotor_pending_slot_ >= 0) return;
    const auto slot = std::max(rotor_next_slot_, rotor_->first_slot_at_or_after(now));
    rotor_pending_slot_ = slot;
    push({rotor_->slot_start(slot), EventKind::rotor_slot, static_cast<std::uint64_t>(slot)});
  }

  void check_conservation() {
    ++audit_.conservation_checks;
    std::uint64_t in_planes = 0;
    if (rotor_) in_planes += rotor_->queued_bits();
    if (expander_) in_planes += expander_->pending_bits();
    // Cache flows count as in-plane until their finish event.
    in_planes += cache_pending_;
    if (ledger_.injected_bits() != ledger_.delivered_bits() + in_planes) ++audit_.conservation_violations;
  }

  SimResult collect(std::span<const Flow> flows, const std::vector<double>& release, bool completed) {
    SimResult res;
    res.completed = completed;
    res.flows.resize(flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i) {
      const auto& e = ledger_[i];
      auto& rec = res.flows[i];
      rec.flow_id = i;
      rec.arrival_s = flows[i].arrival_s;
      rec.release_s = release[i];
      rec.plane = plane_of_[i];
      rec.completed = e.done;
      rec.completion_s = e.done ? e.completion_s : std::numeric_limits<double>::quiet_NaN();
      rec.hops = e.hops;
      auto& ps = rec.plane == Plane::rotor ? res.rotor : rec.plane == Plane::cache ? res.cache : res.expander;
      ++ps.flows;
      ps.bits += flows[i].size_bits;
    }
    res.dct_s = ledger_.max_completion_s();
    res.spill_count = spills_;
    const double horizon = res.dct_s > 0 ? res.dct_s : 1.0;
    if (rotor_) {
      const auto& st = rotor_->stats();
      res.rotor.link_bits = static_cast<double>(st.link_bits);
      if (st.slots_served > 0)
        res.rotor.utilisation = static_cast<double>(st.link_bits) /
                                (static_cast<double>(st.slots_served) * cfg_.k_r * cfg_.n *
                                 static_cast<double>(rotor_->slot_capacity_bits()));
      audit_.rotor_max_link_bits = st.max_link_bits_in_slot;
      audit_.rotor_slot_capacity_bits = rotor_->slot_capacity_bits();
    }
    if (cache_) {
      const auto& st = cache_->stats();
      res.cache.link_bits = static_cast<double>(st.bits);
      res.cache.utilisation = st.busy_port_s / (cfg_.k_c * cfg_.n * horizon);
      audit_.cache_port_overlaps = st.port_overlaps;
    }
    if (expander_) {
      const auto& st = expander_->stats();
      res.expander.link_bits = st.link_bits;
      res.expander.utilisation = st.link_bits / (cfg_.k_s * cfg_.n * cfg_.rate_bps * horizon);
      audit_.expander_max_link_utilisation = st.max_link_utilisation;
    }
    res.audit = audit_;
    return res;
  }

  NetworkConfig cfg_;
  SimOptions opt_;
  std::optional<topology::ExpanderGraph> graph_;
  FlowLedger ledger_;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::uint64_t seq_ = 0;
  std::unique_ptr<RotorPlane> rotor_;
  std::unique_ptr<CachePlane> cache_;
  std::unique_ptr<ExpanderPlane> expander_;
  std::unique_ptr<topology::ShortestPathSampler> paths_;
  std::mt19937_64 path_rng_;
  std::vector<CachePlane::Reservation> reservations_;
  std::vector<Plane> plane_of_;
  std::uint64_t cache_pending_ = 0;
  std::int64_t rotor_pending_slot_ = -1;
  std::int64_t rotor_next_slot_ = 0;
  std::uint64_t expander_version_ = 0;
  std::size_t spills_ = 0;
  Audit audit_;
};

/// Convenience wrapper: one simulation of `flows` on `c`.
inline SimResult run(const NetworkConfig& c, std::span<const Flow> flows, const SimOptions& opt = {}) {
  Simulator sim(c, opt);
  return sim.run(flows);
}

// Result files: per-flow `flow_id,arrival_s,completion_s,plane,hops` and a
// one-line summary.

inline void write_flow_records(std::ostream& os, const SimResult& r) {
  csv::Writer w(os);
  w.header({"flow_id", "arrival_s", "completion_s", "plane", "hops"});
  for (const auto& f : r.flows) {
    w.field(static_cast<std::uint64_t>(f.flow_id)).field(f.arrival_s);
    if (f.completed)
      w.field(f.completion_s);
    else
      w.field(std::string_view("did-not-complete"));
    w.field(to_string(f.plane)).field(f.hops);
    w.end_row();
  }
}

inline void write_summary(std::ostream& os, const SimResult& r) {
  csv::Writer w(os);
  w.header({"dct_s", "completed", "flows", "spill_count", "expander_flows", "cache_flows", "rotor_flows",
            "expander_utilisation", "cache_utilisation", "rotor_utilisation"});
  w.field(r.dct_s)
      .field(std::string_view(r.completed ? "true" : "did-not-complete"))
      .field(static_cast<std::uint64_t>(r.flows.size()))
      .field(static_cast<std::uint64_t>(r.spill_count))
      .field(r.expander.flows)
      .field(r.cache.flows)
      .field(r.rotor.flows)
      .field(r.expander.utilisation)
      .field(r.cache.utilisation)
      .field(r.rotor.utilisation);
  w.end_row();
}

}  // namespace tmt::sim
