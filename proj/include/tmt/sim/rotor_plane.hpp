#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

#include "tmt/model.hpp"
#include "tmt/sim/ledger.hpp"

namespace tmt::sim {

/// k_r rotor switches cycling through the n-1 cyclic-shift matchings. Switch
/// `sw` is offset by floor(sw*(n-1)/k_r) slots so the switches cover
/// different matchings in the same slot. Each slot lasts delta (every circuit
/// carries up to delta*r bits) followed by R_r of reconfiguration.
///
/// Service of a circuit i->j within a slot, in order:
///   1. bits relayed to i earlier whose final destination is j (second hop),
///   2. i's own queue for j (direct),
///   3. with the capacity left, i's bits for some other destination d are
///      handed to j for a later second hop (Valiant relay). d maximises
///      backlog(i,d) - backlog(j,d), and j holds at most one slot of relayed
///      bits per destination.
/// Relayed bits become eligible for their second hop from the next slot on.
class RotorPlane {
 public:
  struct Chunk {
    std::uint32_t flow;
    std::uint64_t bits;
  };

  struct Stats {
    std::int64_t slots_served = 0;
    std::uint64_t link_bits = 0;     // every hop counted
    std::uint64_t relayed_bits = 0;  // first hops of two-hop bits
    std::uint64_t max_link_bits_in_slot = 0;
  };

  RotorPlane(const NetworkConfig& c, FlowLedger& ledger)
      : n_(c.n),
        k_r_(c.k_r),
        slot_s_(c.slot_s),
        period_s_(c.slot_period_s()),
        rate_(c.rate_bps),
        slot_bits_(static_cast<std::uint64_t>(std::llround(c.slot_bits()))),
        ledger_(ledger),
        direct_(cells()),
        direct_bits_(cells(), 0),
        relay_(cells()),
        relay_bits_(cells(), 0),
        staged_bits_(cells(), 0),
        row_bits_(c.n, 0),
        col_bits_(c.n, 0) {
    if (k_r_ < 1) throw ValidationError("k_r", "rotor plane needs at least one switch");
    if (slot_bits_ == 0) throw ValidationError("slot_s", "a slot must carry at least one bit");
    offsets_.resize(k_r_);
    for (int sw = 0; sw < k_r_; ++sw)
      offsets_[sw] = static_cast<std::int64_t>((static_cast<std::int64_t>(sw) * (n_ - 1)) / k_r_);
  }

  void enqueue(std::uint32_t flow, TorId src, TorId dst, std::uint64_t bits) {
    if (bits == 0) return;
    direct_[at(src, dst)].push_back({flow, bits});
    direct_bits_[at(src, dst)] += bits;
    row_bits_[src] += bits;
    col_bits_[dst] += bits;
    queued_bits_ += bits;
  }

  bool idle() const { return queued_bits_ == 0; }
  std::uint64_t queued_bits() const { return queued_bits_; }
  std::uint64_t direct_backlog(TorId src, TorId dst) const { return direct_bits_[at(src, dst)]; }
  std::uint64_t relay_backlog(TorId holder, TorId dst) const { return relay_bits_[at(holder, dst)]; }
  /// Bits still queued at `src` for its own first hop.
  std::uint64_t source_backlog(TorId src) const { return row_bits_[src]; }
  /// Bits anywhere in the plane still bound for `dst`.
  std::uint64_t destination_backlog(TorId dst) const { return col_bits_[dst]; }
  std::uint64_t slot_capacity_bits() const { return slot_bits_; }
  /// Bits per second one ToR can push through all rotor switches, averaged
  /// over slot and reconfiguration.
  double tor_capacity_bps() const { return static_cast<double>(slot_bits_) * k_r_ / period_s_; }
  const Stats& stats() const { return stats_; }

  double slot_start(std::int64_t slot) const { return static_cast<double>(slot) * period_s_; }

  /// First slot whose start is at or after t.
  std::int64_t first_slot_at_or_after(double t) const {
    auto s = static_cast<std::int64_t>(std::ceil(t / period_s_ - 1e-9));
    return std::max<std::int64_t>(s, 0);
  }

  /// Output port that input i of switch `sw` reaches during `slot`.
  TorId peer(int sw, std::int64_t slot, TorId i) const {
    const auto shift = 1 + (slot + offsets_[sw]) % (n_ - 1);
    return static_cast<TorId>((i + shift) % n_);
  }

  /// Serves one full slot on every switch.
  void serve_slot(std::int64_t slot) {
    const double t0 = slot_start(slot);
    for (int sw = 0; sw < k_r_; ++sw)
      for (TorId i = 0; i < n_; ++i) serve_circuit(i, peer(sw, slot, i), t0);
    commit_staged();
    ++stats_.slots_served;
  }

 private:
  std::size_t cells() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t at(TorId a, TorId b) const { return static_cast<std::size_t>(a) * n_ + b; }

  // Pops up to `budget` bits from `q`, delivering them at their destination.
  std::uint64_t drain(std::deque<Chunk>& q, std::uint64_t& q_bits, std::uint64_t budget, std::uint64_t& sent,
                      double t0, int hops, TorId dst) {
    std::uint64_t moved = 0;
    while (budget > 0 && !q.empty()) {
      auto& c = q.front();
      const auto b = std::min(budget, c.bits);
      sent += b;
      ledger_.deliver(c.flow, b, t0 + static_cast<double>(sent) / rate_, hops);
      c.bits -= b;
      budget -= b;
      moved += b;
      if (c.bits == 0) q.pop_front();
    }
    q_bits -= moved;
    queued_bits_ -= moved;
    col_bits_[dst] -= moved;
    return moved;
  }

  void serve_circuit(TorId i, TorId j, double t0) {
    std::uint64_t sent = 0;
    drain(relay_[at(i, j)], relay_bits_[at(i, j)], slot_bits_, sent, t0, 2, j);
    row_bits_[i] -= drain(direct_[at(i, j)], direct_bits_[at(i, j)], slot_bits_ - sent, sent, t0, 1, j);
    // Valiant relay with the spare capacity.
    for (int guard = 0; sent < slot_bits_ && guard < n_; ++guard) {
      TorId best = -1;
      std::int64_t best_score = 0;
      for (TorId d = 0; d < n_; ++d) {
        if (d == i || d == j) continue;
        const auto mine = static_cast<std::int64_t>(direct_bits_[at(i, d)]);
        if (mine == 0) continue;
        const auto held = relay_bits_[at(j, d)] + staged_bits_[at(j, d)];
        if (held >= slot_bits_) continue;
        const auto score = mine - static_cast<std::int64_t>(direct_bits_[at(j, d)] + held);
        if (score > best_score) {
          best_score = score;
          best = d;
        }
      }
      if (best < 0) break;
      const auto held = relay_bits_[at(j, best)] + staged_bits_[at(j, best)];
      std::uint64_t amount = std::min<std::uint64_t>(slot_bits_ - sent, slot_bits_ - held);
      amount = std::min<std::uint64_t>(amount, static_cast<std::uint64_t>((best_score + 1) / 2));
      hand_over(i, j, best, amount);
      sent += amount;
      stats_.relayed_bits += amount;
    }
    stats_.link_bits += sent;
    stats_.max_link_bits_in_slot = std::max(stats_.max_link_bits_in_slot, sent);
  }

  // Moves `amount` bits of i's queue for d into j's staged relay queue for d.
  void hand_over(TorId i, TorId j, TorId d, std::uint64_t amount) {
    auto& q = direct_[at(i, d)];
    direct_bits_[at(i, d)] -= amount;
    row_bits_[i] -= amount;
    staged_bits_[at(j, d)] += amount;
    while (amount > 0) {
      auto& c = q.front();
      const auto b = std::min(amount, c.bits);
      staged_.push_back({at(j, d), {c.flow, b}});
      c.bits -= b;
      amount -= b;
      if (c.bits == 0) q.pop_front();
    }
  }

  void commit_staged() {
    for (const auto& [cell, chunk] : staged_) {
      relay_[cell].push_back(chunk);
      relay_bits_[cell] += chunk.bits;
      staged_bits_[cell] -= chunk.bits;
    }
    staged_.clear();
  }

  struct Staged {
    std::size_t cell;
    Chunk chunk;
  };

  int n_;
  int k_r_;
  double slot_s_;
  double period_s_;
  double rate_;
  std::uint64_t slot_bits_;
  FlowLedger& ledger_;
  std::vector<std::int64_t> offsets_;
  std::vector<std::deque<Chunk>> direct_;
  std::vector<std::uint64_t> direct_bits_;
  std::vector<std::deque<Chunk>> relay_;  // indexed (holder, final destination)
  std::vector<std::uint64_t> relay_bits_;
  std::vector<std::uint64_t> staged_bits_;
  std::vector<Staged> staged_;
  std::vector<std::uint64_t> row_bits_;
  std::vector<std::uint64_t> col_bits_;
  std::uint64_t queued_bits_ = 0;
  Stats stats_;
};

}  // namespace tmt::sim
