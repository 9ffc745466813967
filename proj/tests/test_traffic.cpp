#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tmt/traffic.hpp"

using namespace tmt;
using namespace tmt::traffic;

namespace {

NetworkConfig net(int n, int k_s = 0, int k_r = 16, int k_c = 16) {
  auto c = profile("paper-numeric");
  c.n = n;
  c.k_s = k_s;
  c.k_r = k_r;
  c.k_c = k_c;
  return validate(c);
}

// Total variation distance from uniform as the largest excess mass over any
// subset of outcomes.
double tv_by_subsets(const std::vector<double>& p) {
  const int n = static_cast<int>(p.size());
  double best = 0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    double mass = 0;
    int count = 0;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) {
        mass += p[i];
        ++count;
      }
    best = std::max(best, mass - static_cast<double>(count) / n);
  }
  return best;
}

// Every distribution on n outcomes whose masses are multiples of `step`.
void for_each_grid_point(int n, int units, std::vector<int>& cur, const std::function<void()>& fn) {
  if (static_cast<int>(cur.size()) == n - 1) {
    cur.push_back(units);
    fn();
    cur.pop_back();
    return;
  }
  for (int u = 0; u <= units; ++u) {
    cur.push_back(u);
    for_each_grid_point(n, units - u, cur, fn);
    cur.pop_back();
  }
}

}  // namespace

TEST(VariationDistance, MatchesSubsetFormOnSmallGrids) {
  const int units = 20;  // step 0.05
  for (int n = 1; n <= 4; ++n) {
    std::vector<int> cur;
    int checked = 0;
    for_each_grid_point(n, units, cur, [&] {
      std::vector<double> p;
      for (int u : cur) p.push_back(u / double(units));
      const double d = variation_distance(p);
      EXPECT_NEAR(d, tv_by_subsets(p), 1e-12);
      EXPECT_GE(d, -1e-15);
      EXPECT_LE(d, 1.0 - 1.0 / n + 1e-12);
      ++checked;
    });
    EXPECT_GT(checked, 0);
  }
}

TEST(VariationDistance, Extremes) {
  EXPECT_DOUBLE_EQ(variation_distance(std::vector<double>{0.25, 0.25, 0.25, 0.25}), 0.0);
  EXPECT_DOUBLE_EQ(variation_distance(std::vector<double>{1, 0, 0, 0}), 0.75);
  EXPECT_THROW(variation_distance(std::vector<double>{0.5, 0.6}), ValidationError);
  EXPECT_THROW(variation_distance(std::vector<double>{1.5, -0.5}), ValidationError);
  EXPECT_THROW(variation_distance(std::vector<double>{}), ValidationError);
}

TEST(Skewness, UniformAndConcentratedRows) {
  const int n = 8;
  auto c = net(n);
  DemandMatrix uni(n), one(n);
  for (TorId i = 0; i < n; ++i)
    for (TorId j = 0; j < n; ++j) {
      if (i == j) continue;
      uni.add({i, j, 2'000'000, 0, FlowClass::medium});
    }
  for (TorId i = 0; i < n; ++i) one.add({i, static_cast<TorId>((i + 1) % n), 2'000'000, 0, FlowClass::medium});
  EXPECT_NEAR(skewness_phi(uni), 1.0, 1e-12);
  EXPECT_NEAR(skewness_phi(one), 1.0 / (n - 1), 1e-12);
  EXPECT_NEAR(skewness_phi(uni, ClassFilter::medium), 1.0, 1e-12);
  EXPECT_THROW(skewness_phi(uni, ClassFilter::large), ValidationError);
  (void)c;
}

TEST(Skewness, ActiveScopeIgnoresIdleTors) {
  const int n = 8;
  DemandMatrix d(n);
  // ToRs 0..3 send uniformly to each other; 4..7 are idle.
  for (TorId i = 0; i < 4; ++i)
    for (TorId j = 0; j < 4; ++j)
      if (i != j) d.add({i, j, 5'000'000, 0, FlowClass::medium});
  EXPECT_NEAR(skewness_phi(d, ClassFilter::all, DestinationScope::active_only), 1.0, 1e-12);
  EXPECT_LT(skewness_phi(d, ClassFilter::all, DestinationScope::all_others), 1.0);
}

TEST(Generate, DeterministicSortedAndValid) {
  auto c = net(32);
  TrafficSpec s;
  s.load_x = 0.1;
  s.seed = 4;
  auto a = generate(s, c);
  auto b = generate(s, c);
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NO_THROW(check_flow(a[i], c));
    EXPECT_GE(a[i].arrival_s, 0);
    EXPECT_LT(a[i].arrival_s, s.window_s);
    if (i) EXPECT_LE(a[i - 1].arrival_s, a[i].arrival_s);
  }
  s.seed = 5;
  EXPECT_NE(generate(s, c), a);
}

TEST(Generate, ZeroLoadIsEmpty) {
  TrafficSpec s;
  s.load_x = 0;
  EXPECT_TRUE(generate(s, net(16)).empty());
}

TEST(Generate, CompoundPoissonMoments) {
  // Per-source bits in a window: mean = rate * W, variance = lambda * W * E[S^2].
  auto c = net(256);
  TrafficSpec s;
  s.load_x = 0.02;
  s.window_s = 0.5;
  s.seed = 21;
  s.distribution = FlowSizeDistribution::log_uniform(1e6, 64e6);
  auto flows = generate(s, c);
  std::vector<double> per(c.n, 0.0);
  for (const auto& f : flows) per[f.src] += static_cast<double>(f.size_bits);
  const double rate = s.per_tor_bps(c);
  const double lambda = rate / s.distribution.mean();
  const double mean = rate * s.window_s;
  const double var = lambda * s.window_s * s.distribution.second_moment();
  double m = 0, v = 0;
  for (double x : per) m += x;
  m /= c.n;
  for (double x : per) v += (x - m) * (x - m);
  v /= (c.n - 1);
  EXPECT_NEAR(m, mean, 4 * std::sqrt(var / c.n));
  EXPECT_NEAR(v / var, 1.0, 0.35);
}

TEST(Generate, SkewedUsesOnlyActiveTors) {
  auto c = net(64);
  TrafficSpec s;
  s.model = Model::skewed;
  s.load_x = 0.25;
  s.per_tor_rate_L = 0.05;
  auto active = active_tors(s, c);
  EXPECT_EQ(active.size(), 16u);
  std::set<TorId> act(active.begin(), active.end());
  auto flows = generate(s, c);
  ASSERT_FALSE(flows.empty());
  for (const auto& f : flows) {
    EXPECT_TRUE(act.count(f.src));
    EXPECT_TRUE(act.count(f.dst));
  }
  s.load_x = 1.0 / 64;
  EXPECT_THROW(active_tors(s, c), ValidationError);
}

TEST(ClassRates, TwoPointMixture) {
  auto c = net(256, 0, 16, 16);  // k = 32
  auto d = FlowSizeDistribution::two_point_by_bytes(1e7, 0.5, 1e9);
  auto u = class_rates(d, 1.0, c);
  EXPECT_DOUBLE_EQ(u.small_bps, 0.0);
  EXPECT_NEAR(u.medium_bps, 1.6e11, 1e-3);
  EXPECT_NEAR(u.large_bps, 1.6e11, 1e-3);
}

TEST(ClassRates, NormalisedAndLinear) {
  std::vector<FlowSizeDistribution> ds = {
      FlowSizeDistribution::log_uniform(1e4, 1e10),
      FlowSizeDistribution::pareto(1.2, 1e4, 1e10),
      FlowSizeDistribution::two_point_by_bytes(1e5, 0.3, 1e9),
      FlowSizeDistribution::empirical({1e3, 5e6, 2e8}, {0.7, 0.2, 0.1}),
  };
  for (auto c : {net(64, 5, 16, 16), net(256, 0, 32, 0)}) {
    const double full = c.k() * c.rate_bps;
    for (const auto& d : ds) {
      auto u1 = class_rates(d, 1.0, c);
      EXPECT_NEAR(u1.total(), full, 1e-9 * full);
      for (double x : {0.0, 0.1, 0.37, 0.5, 1.0}) {
        auto u = class_rates(d, x, c);
        EXPECT_EQ(u.small_bps, x * u1.small_bps);
        EXPECT_EQ(u.medium_bps, x * u1.medium_bps);
        EXPECT_EQ(u.large_bps, x * u1.large_bps);
      }
    }
  }
}

TEST(ClassRates, EmpiricalMassesByClass) {
  // Generated traffic reproduces the per-class byte split in expectation.
  auto c = net(128, 5, 16, 16);
  TrafficSpec s;
  s.load_x = 0.05;
  s.distribution = FlowSizeDistribution::empirical({5e5, 1e7, 2e8}, {0.5, 0.4, 0.1});
  auto flows = generate(s, c);
  auto d = DemandMatrix::from_flows(flows, c.n);
  auto u = class_rates(s.distribution, s.load_x, c);
  const double total = static_cast<double>(d.total());
  EXPECT_NEAR(static_cast<double>(d.total(ClassFilter::large)) / total, u.large_bps / u.total(), 0.02);
  EXPECT_NEAR(static_cast<double>(d.total(ClassFilter::medium)) / total, u.medium_bps / u.total(), 0.02);
}

TEST(DemandMatrix, Totals) {
  DemandMatrix d(4);
  d.add({0, 1, 10, 0, FlowClass::small});
  d.add({0, 1, 2'000'000, 0, FlowClass::medium});
  d.add({2, 3, 5, 0, FlowClass::small});
  EXPECT_EQ(d.cell(0, 1), 2'000'010u);
  EXPECT_EQ(d.cell(0, 1, ClassFilter::small), 10u);
  EXPECT_EQ(d.row_total(0), 2'000'010u);
  EXPECT_EQ(d.total(), 2'000'015u);
  EXPECT_EQ(d.total(ClassFilter::large), 0u);
  EXPECT_THROW(d.add({1, 1, 5, 0, FlowClass::small}), ValidationError);
}

TEST(Trace, RoundTrip) {
  auto c = net(16);
  TrafficSpec s;
  s.load_x = 0.05;
  auto flows = generate(s, c);
  std::stringstream ss;
  write_trace(ss, flows);
  auto back = read_trace(ss, c);
  EXPECT_EQ(back, flows);
}

TEST(Trace, RejectsBadRecords) {
  auto c = net(16);
  std::stringstream a("arrival_s,src,dst,size_bits,class\n0,1,1,5,small\n");
  EXPECT_THROW(read_trace(a, c), ParseError);
  std::stringstream b("arrival_s,src,dst,size_bits,class\n0,1,2,5,large\n");
  EXPECT_THROW(read_trace(b, c), ParseError);
  std::stringstream h("t,src,dst\n");
  EXPECT_THROW(read_trace(h, c), ParseError);
}

TEST(TrafficSpec, Checks) {
  TrafficSpec s;
  s.load_x = 1.5;
  EXPECT_THROW(s.check(), ValidationError);
  s.load_x = 0.5;
  s.window_s = 0;
  EXPECT_THROW(s.check(), ValidationError);
  EXPECT_EQ(model_from_string("skewed"), Model::skewed);
  EXPECT_THROW(model_from_string("bursty"), Error);
}
