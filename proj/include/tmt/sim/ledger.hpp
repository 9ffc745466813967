#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "tmt/error.hpp"

namespace tmt::sim {

enum class Plane : std::uint8_t { expander, cache, rotor };

inline std::string_view to_string(Plane p) {
  switch (p) {
    case Plane::expander: return "expander";
    case Plane::cache: return "cache";
    case Plane::rotor: return "rotor";
  }
  return "?";
}

/// Per-flow delivery bookkeeping shared by all planes. Bits are counted as
/// integers so conservation can be checked exactly.
class FlowLedger {
 public:
  struct Entry {
    std::uint64_t size = 0;
    std::uint64_t remaining = 0;
    double last_delivery_s = 0;
    double completion_s = std::numeric_limits<double>::quiet_NaN();
    Plane plane = Plane::rotor;
    std::uint8_t hops = 0;
    bool injected = false;
    bool done = false;
  };

  explicit FlowLedger(std::size_t flows = 0) : entries_(flows) {}

  void inject(std::size_t flow, std::uint64_t bits, Plane plane) {
    auto& e = entries_.at(flow);
    if (e.injected) throw SimulationError("flow injected twice");
    e.size = e.remaining = bits;
    e.plane = plane;
    e.injected = true;
    injected_bits_ += bits;
  }

  /// Records `bits` of `flow` reaching its destination at `t` after `hops`
  /// hops. Returns true when this completes the flow.
  bool deliver(std::size_t flow, std::uint64_t bits, double t, int hops) {
    auto& e = entries_[flow];
    if (bits > e.remaining) throw SimulationError("delivered more bits than the flow holds");
    e.remaining -= bits;
    e.last_delivery_s = std::max(e.last_delivery_s, t);
    e.hops = static_cast<std::uint8_t>(std::max<int>(e.hops, hops));
    delivered_bits_ += bits;
    if (e.remaining == 0 && !e.done) {
      e.done = true;
      e.completion_s = e.last_delivery_s;
      ++done_count_;
      max_completion_s_ = std::max(max_completion_s_, e.completion_s);
      return true;
    }
    return false;
  }

  const Entry& operator[](std::size_t flow) const { return entries_[flow]; }
  std::size_t size() const { return entries_.size(); }
  std::uint64_t injected_bits() const { return injected_bits_; }
  std::uint64_t delivered_bits() const { return delivered_bits_; }
  std::size_t done_count() const { return done_count_; }
  double max_completion_s() const { return max_completion_s_; }

 private:
  std::vector<Entry> entries_;
  std::uint64_t injected_bits_ = 0;
  std::uint64_t delivered_bits_ = 0;
  std::size_t done_count_ = 0;
  double max_completion_s_ = 0;
};

}  // namespace tmt::sim
