#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tmt/distribution.hpp"
#include "tmt/error.hpp"
#include "tmt/model.hpp"

namespace tmt::topology {

/// Permutation of ToR ports: input i is connected to output perm[i].
class Matching {
 public:
  Matching() = default;
  explicit Matching(std::vector<TorId> perm) : perm_(std::move(perm)) {
    std::vector<char> seen(perm_.size(), 0);
    for (auto p : perm_) {
      if (p < 0 || static_cast<std::size_t>(p) >= perm_.size() || seen[p])
        throw TopologyError("matching is not a permutation");
      seen[p] = 1;
    }
  }

  std::size_t size() const { return perm_.size(); }
  TorId operator[](std::size_t i) const { return perm_[i]; }
  std::span<const TorId> perm() const { return perm_; }

  bool fixed_point_free() const {
    for (std::size_t i = 0; i < perm_.size(); ++i)
      if (perm_[i] == static_cast<TorId>(i)) return false;
    return true;
  }

  bool operator==(const Matching&) const = default;

 private:
  std::vector<TorId> perm_;
};

/// Matching t (t = 1..n-1) maps i to (i + t) mod n; cycling through all of
/// them connects every ordered pair exactly once.
inline Matching cyclic_shift(int n, int t) {
  std::vector<TorId> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = static_cast<TorId>((i + t) % n);
  return Matching(std::move(perm));
}

inline std::vector<Matching> rotor_cycle(int n) {
  if (n < 2) throw ValidationError("n", "rotor cycle needs n >= 2");
  std::vector<Matching> out;
  out.reserve(n - 1);
  for (int t = 1; t < n; ++t) out.push_back(cyclic_shift(n, t));
  return out;
}

/// Directed multigraph formed by the union of a set of matchings. Every node
/// has in- and out-degree equal to the number of matchings (parallel edges
/// counted). Shortest paths see parallel edges as one edge.
class ExpanderGraph {
 public:
  ExpanderGraph(int n, std::vector<Matching> matchings, std::uint64_t seed = 0)
      : n_(n), seed_(seed), matchings_(std::move(matchings)) {
    if (n < 2) throw ValidationError("n", "graph needs n >= 2");
    for (const auto& m : matchings_)
      if (static_cast<int>(m.size()) != n) throw TopologyError("matching size differs from node count");
    build_adjacency();
  }

  int node_count() const { return n_; }
  int degree() const { return static_cast<int>(matchings_.size()); }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Matching>& matchings() const { return matchings_; }

  /// Distinct out-neighbours of u.
  std::span<const TorId> out_neighbors(TorId u) const {
    return {out_.data() + out_off_[u], out_.data() + out_off_[u + 1]};
  }
  /// Distinct in-neighbours of v.
  std::span<const TorId> in_neighbors(TorId v) const {
    return {in_.data() + in_off_[v], in_.data() + in_off_[v + 1]};
  }
  /// Number of parallel edges u->v.
  int multiplicity(TorId u, TorId v) const {
    auto nb = out_neighbors(u);
    auto it = std::lower_bound(nb.begin(), nb.end(), v);
    if (it == nb.end() || *it != v) return 0;
    return mult_[out_off_[u] + static_cast<std::size_t>(it - nb.begin())];
  }
  /// Dense id of the distinct edge u->v in [0, distinct_edge_count()), or -1.
  std::int64_t edge_id(TorId u, TorId v) const {
    auto nb = out_neighbors(u);
    auto it = std::lower_bound(nb.begin(), nb.end(), v);
    if (it == nb.end() || *it != v) return -1;
    return static_cast<std::int64_t>(out_off_[u] + static_cast<std::size_t>(it - nb.begin()));
  }
  std::size_t distinct_edge_count() const { return out_.size(); }
  int edge_multiplicity(std::size_t edge) const { return mult_[edge]; }

  int out_degree(TorId u) const {
    int d = 0;
    for (std::size_t e = out_off_[u]; e < out_off_[u + 1]; ++e) d += mult_[e];
    return d;
  }
  int in_degree(TorId v) const {
    int d = 0;
    for (const auto& m : matchings_)
      for (int i = 0; i < n_; ++i)
        if (m[i] == v) ++d;
    return d;
  }

  /// Hop distances from `src` (-1 when unreachable).
  std::vector<int> bfs(TorId src) const {
    std::vector<int> dist(n_, -1);
    std::vector<TorId> queue;
    queue.reserve(n_);
    dist[src] = 0;
    queue.push_back(src);
    for (std::size_t h = 0; h < queue.size(); ++h) {
      TorId u = queue[h];
      for (TorId v : out_neighbors(u)) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
    return dist;
  }

  void write_edge_list(std::ostream& os) const {
    for (const auto& m : matchings_)
      for (int i = 0; i < n_; ++i) os << i << ' ' << m[i] << '\n';
  }

 private:
  void build_adjacency() {
    std::vector<std::vector<TorId>> out(n_), in(n_);
    for (const auto& m : matchings_)
      for (int i = 0; i < n_; ++i) {
        out[i].push_back(m[i]);
        in[m[i]].push_back(static_cast<TorId>(i));
      }
    out_off_.assign(n_ + 1, 0);
    in_off_.assign(n_ + 1, 0);
    for (int u = 0; u < n_; ++u) {
      auto& o = out[u];
      std::sort(o.begin(), o.end());
      for (std::size_t i = 0; i < o.size();) {
        std::size_t j = i;
        while (j < o.size() && o[j] == o[i]) ++j;
        out_.push_back(o[i]);
        mult_.push_back(static_cast<int>(j - i));
        i = j;
      }
      out_off_[u + 1] = out_.size();
      auto& a = in[u];
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
      in_.insert(in_.end(), a.begin(), a.end());
      in_off_[u + 1] = in_.size();
    }
  }

  int n_;
  std::uint64_t seed_;
  std::vector<Matching> matchings_;
  std::vector<TorId> out_, in_;
  std::vector<int> mult_;
  std::vector<std::size_t> out_off_, in_off_;
};

/// Uniform fixed-point-free permutation: Fisher-Yates, resampled until no
/// fixed point remains.
inline Matching random_fixed_point_free(int n, std::mt19937_64& rng) {
  std::vector<TorId> perm(n);
  for (;;) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
      std::swap(perm[i], perm[j]);
    }
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) ok = perm[i] != i;
    if (ok) return Matching(perm);
  }
}

/// Union of k_s independently sampled fixed-point-free permutations,
/// reproducible per seed.
inline ExpanderGraph build_expander(int n, int k_s, std::uint64_t seed) {
  if (n < 2) throw ValidationError("n", "expander needs n >= 2");
  if (k_s < 1) throw ValidationError("k_s", "expander needs k_s >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Matching> ms;
  ms.reserve(k_s);
  for (int i = 0; i < k_s; ++i) ms.push_back(random_fixed_point_free(n, rng));
  return ExpanderGraph(n, std::move(ms), seed);
}

/// Union of all n-1 rotor matchings: the complete digraph.
inline ExpanderGraph complete_digraph(int n) { return ExpanderGraph(n, rotor_cycle(n)); }

/// Mean shortest-path hop count over all ordered pairs (u, v), u != v.
/// Throws TopologyError naming an unreachable pair.
inline double expected_path_length(const ExpanderGraph& g) {
  const int n = g.node_count();
  std::uint64_t total = 0;
  for (TorId s = 0; s < n; ++s) {
    auto dist = g.bfs(s);
    for (TorId v = 0; v < n; ++v) {
      if (v == s) continue;
      if (dist[v] < 0)
        throw TopologyError("graph is disconnected: no path " + std::to_string(s) + " -> " + std::to_string(v));
      total += static_cast<std::uint64_t>(dist[v]);
    }
  }
  return static_cast<double>(total) / (static_cast<double>(n) * (n - 1));
}

/// Samples one shortest path uniformly among all shortest paths, caching the
/// per-source BFS layers and path counts.
class ShortestPathSampler {
 public:
  explicit ShortestPathSampler(const ExpanderGraph& g) : g_(g), cache_(g.node_count()) {}

  /// Node sequence src, ..., dst.
  std::vector<TorId> sample(TorId src, TorId dst, std::mt19937_64& rng) {
    const auto& info = layers(src);
    if (info.dist[dst] < 0)
      throw TopologyError("no path " + std::to_string(src) + " -> " + std::to_string(dst));
    std::vector<TorId> path{dst};
    TorId v = dst;
    while (v != src) {
      // Pick a predecessor on a shortest path, weighted by its path count.
      double pick = uniform01(rng) * info.count[v];
      TorId chosen = -1;
      for (TorId p : g_.in_neighbors(v)) {
        if (info.dist[p] != info.dist[v] - 1) continue;
        chosen = p;
        pick -= info.count[p];
        if (pick < 0) break;
      }
      v = chosen;
      path.push_back(v);
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  int distance(TorId src, TorId dst) { return layers(src).dist[dst]; }

 private:
  struct Layers {
    std::vector<int> dist;
    std::vector<double> count;
  };

  const Layers& layers(TorId src) {
    auto& slot = cache_[src];
    if (!slot.dist.empty()) return slot;
    const int n = g_.node_count();
    slot.dist = g_.bfs(src);
    slot.count.assign(n, 0.0);
    std::vector<TorId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](TorId a, TorId b) { return slot.dist[a] < slot.dist[b]; });
    slot.count[src] = 1.0;
    for (TorId v : order) {
      if (slot.dist[v] <= 0) continue;
      double c = 0;
      for (TorId p : g_.in_neighbors(v))
        if (slot.dist[p] == slot.dist[v] - 1) c += slot.count[p];
      slot.count[v] = c;
    }
    return slot;
  }

  const ExpanderGraph& g_;
  std::vector<Layers> cache_;
};

}  // namespace tmt::topology
