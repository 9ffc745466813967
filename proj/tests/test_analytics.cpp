#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tmt/analytics.hpp"

using namespace tmt;
using namespace tmt::analytics;

namespace {

NetworkConfig net(int k_s, int k_r, int k_c, int n = 256) {
  auto c = profile("paper-numeric");
  c.n = n;
  c.k_s = k_s;
  c.k_r = k_r;
  c.k_c = k_c;
  return validate(c);
}

// Byte split for which the rotor and cache components are equal at phi_m:
// w_l * (R_c/L + 1/r) = w_m * (2 - phi_m)(R_r + delta)/|m|.
FlowSizeDistribution equal_ratio_mixture(double medium, double large, double phi_m = 1.0) {
  const double cache = 15e-3 / large + 1e-10;
  const double rotor = (2.0 - phi_m) * 110e-6 / 1e6;
  const double w_large = rotor / (cache + rotor);
  return FlowSizeDistribution::two_point_by_bytes(large, w_large, medium);
}

std::vector<double> grid21() {
  std::vector<double> xs;
  for (int i = 1; i <= 21; ++i) xs.push_back(i / 21.0);
  return xs;
}

}  // namespace

TEST(DctExpander, Values) {
  EXPECT_EQ(dct_expander(0, 1.85), 0);
  EXPECT_EQ(dct_expander(1, 1), 1);
  EXPECT_DOUBLE_EQ(dct_expander(0.5, 1.85), 0.925);
  EXPECT_THROW(dct_expander(0.5, 0.9), ValidationError);
  EXPECT_THROW(dct_expander(1.5, 2), ValidationError);
}

TEST(DctRotor, Values) {
  auto c = net(0, 32, 0);
  EXPECT_DOUBLE_EQ(dct_rotor(1, 1, c), 1.1);
  EXPECT_DOUBLE_EQ(dct_rotor(0.5, 0, c), 1.1);
  EXPECT_EQ(dct_rotor(0, 0.3, c), 0);
  EXPECT_DOUBLE_EQ(beta(1, c), 1.1);
  EXPECT_DOUBLE_EQ(dct_all_to_all_rotor(c.medium_bits() * 32, 32, c), 110e-6);
  EXPECT_EQ(dct_all_to_all_rotor(0, 32, c), 0);
  EXPECT_DOUBLE_EQ(dct_all_to_all_rotor(4e9, 32, c), 2 * dct_all_to_all_rotor(2e9, 32, c));
}

TEST(DctRotor, AgreesWithAllToAllOnInflatedTraffic) {
  for (auto c : {net(0, 32, 0), net(5, 16, 16), net(0, 7, 0, 64)}) {
    const int k = c.k();
    for (int i = 0; i <= 10; ++i)
      for (int j = 0; j <= 10; ++j) {
        const double x = i / 10.0, phi = j / 10.0;
        const double u = x * k * c.rate_bps;  // bits per ToR at load x, one second
        const double oracle = dct_all_to_all_rotor((2.0 - phi) * u, k, c);
        EXPECT_NEAR(dct_rotor(x, phi, c), oracle, 1e-12 * std::max(1.0, oracle)) << x << ' ' << phi;
      }
  }
}

TEST(DctRotor, MonotoneInLoadAndSkew) {
  auto c = net(0, 32, 0);
  for (int j = 0; j <= 10; ++j)
    for (int i = 1; i <= 10; ++i) {
      EXPECT_GE(dct_rotor(i / 10.0, j / 10.0, c), dct_rotor((i - 1) / 10.0, j / 10.0, c));
      if (j) EXPECT_LE(dct_rotor(i / 10.0, j / 10.0, c), dct_rotor(i / 10.0, (j - 1) / 10.0, c));
    }
}

TEST(LargeThreshold, GoldenValuesAndMonotone) {
  auto c = net(5, 16, 16);
  EXPECT_NEAR(large_flow_threshold(0, c), 1.25e8, 1.25e8 * 1e-9);
  EXPECT_NEAR(large_flow_threshold(1, c), 1.5e9, 1.5e9 * 1e-9);
  double prev = 0;
  for (int j = 0; j <= 20; ++j) {
    const double l = large_flow_threshold(j / 20.0, c);
    EXPECT_GE(l, prev);
    prev = l;
  }
  auto bad = c;
  bad.medium_threshold_bits = c.rate_bps * (c.rotor_reconfig_s + c.slot_s);
  EXPECT_THROW(large_flow_threshold(1, bad), ThresholdError);
}

TEST(DctCache, Values) {
  auto c = net(5, 16, 16);
  auto d = FlowSizeDistribution::two_point_by_bytes(1e9, 0.5, 1e7);
  EXPECT_NEAR(dct_cache(1.6e11, 16, d, c), 1.15, 1e-12);
  EXPECT_EQ(dct_cache(0, 16, d, c), 0);
  EXPECT_THROW(dct_cache(1e9, 0, d, c), ValidationError);
  auto no_large = FlowSizeDistribution::log_uniform(1e6, 64e6);
  EXPECT_THROW(dct_cache(1e9, 16, no_large, c), ValidationError);
  // One flow, one switch.
  auto single = FlowSizeDistribution::empirical({1e9}, {1.0});
  EXPECT_NEAR(dct_cache(1e9, 1, single, c), 15e-3 + 1e9 / 10e9, 1e-12);
  // Worst case charges R_c per smallest large flow.
  EXPECT_GE(dct_cache_worst_case(1.6e11, 16, c), dct_cache(1.6e11, 16, d, c));
}

TEST(CacheCapacity, Values) {
  auto c = net(0, 16, 16);
  auto d = FlowSizeDistribution::two_point_by_bytes(1e9, 0.5, 1e7);
  // U(1,l) = 1.6e11, term = 1.15e-10.
  EXPECT_NEAR(cache_capacity_z(16, d, c), 16 / 18.4, 1e-12);
  EXPECT_EQ(cache_capacity_z(0, d, c), 0);
  EXPECT_DOUBLE_EQ(cache_capacity_z(32, d, c), 2 * cache_capacity_z(16, d, c));
}

TEST(Spill, Values) {
  EXPECT_EQ(spill_fraction(0.5, 0.8), 0);
  EXPECT_NEAR(spill_fraction(1, 0.87), 0.13, 1e-12);
  EXPECT_EQ(spill_fraction(0.3, 0), 1);
  EXPECT_THROW(spill_fraction(0, 0.5), ValidationError);
}

TEST(OptimalSplit, EqualRatioMixtureSplitsEvenly) {
  auto c = net(5, 16, 16);
  for (double large : {1.25e8, 2.5e8, 1e9}) {
    auto d = equal_ratio_mixture(1e7, large);
    auto s = optimal_split(d, 0.5, 1.0, c);
    EXPECT_EQ(s.k_r, 16);
    EXPECT_EQ(s.k_c, 16);
    EXPECT_NEAR(s.real_ratio, 1.0, 1e-9);
    auto b = hybrid_components(0.5, d, 1.0, 16, 16, c, 2.0);
    EXPECT_NEAR(b.rotor_s, b.cache_s, 1e-9 * b.rotor_s);
  }
}

TEST(OptimalSplit, Degenerate) {
  auto c = net(5, 16, 16);
  auto medium = FlowSizeDistribution::log_uniform(1e6, 64e6);
  EXPECT_EQ(optimal_split(medium, 0.5, 1.0, c), (Split{32, 0, 0}));
  auto large = FlowSizeDistribution::empirical({1e9}, {1});
  EXPECT_EQ(optimal_split(large, 0.5, 1.0, c), (Split{0, 32, 0}));
  EXPECT_THROW(optimal_split(medium, 0.5, 1.0, net(5, 1, 0)), ValidationError);
}

TEST(OptimalSplit, LocallyOptimal) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> w(0.02, 0.98), phi(0, 1);
  for (int total : {2, 3, 10, 32, 61}) {
    auto c = net(5, total / 2, total - total / 2);
    for (int t = 0; t < 200; ++t) {
      auto d = FlowSizeDistribution::two_point_by_bytes(std::pow(10.0, 8.2 + 1.5 * w(rng)), w(rng), 5e6);
      const double pm = phi(rng);
      auto s = optimal_split(d, 0.5, pm, c);
      ASSERT_EQ(s.k_r + s.k_c, total);
      const auto u = traffic::class_rates(d, 1.0, c);
      const double cost = cache_cost_per_bit(d, c);
      const double here = split_objective(u, pm, cost, s.k_r, s.k_c, c);
      if (s.k_c > 1) EXPECT_LE(here, split_objective(u, pm, cost, s.k_r + 1, s.k_c - 1, c));
      if (s.k_r > 1) EXPECT_LE(here, split_objective(u, pm, cost, s.k_r - 1, s.k_c + 1, c));
    }
  }
}

TEST(Hybrid, ReducesToRotorWithoutLargeFlows) {
  auto c = net(5, 16, 16);
  auto d = FlowSizeDistribution::log_uniform(1e6, 64e6);
  for (double x : {0.1, 0.5, 0.9}) {
    auto s = optimal_split(d, x, 0.7, c);
    const double rotor = dct_rotor_component(traffic::class_rates(d, x, c).medium_bps, 0.7, s.k_r, c);
    EXPECT_DOUBLE_EQ(dct_hybrid_uniform(x, d, 0.7, c, 2.5), rotor);
  }
}

TEST(Hybrid, CacheSlopeMatchesAlpha) {
  auto c = net(5, 16, 16);
  auto d = equal_ratio_mixture(1e7, 1e9);
  // Least-squares slope of the cache component over an x grid.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int i = 0; i <= 10; ++i) {
    const double x = i / 10.0;
    const double y = hybrid_components(x, d, 1.0, 16, 16, c, 2.0).cache_s;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_NEAR(slope, alpha(1.0, d, 16, c), 1e-9);
  EXPECT_NEAR(hybrid_bound_linear(0.3, d, 16, c), 0.3 * alpha(1.0, d, 16, c), 1e-12);
  EXPECT_NEAR(hybrid_bound_printed(0.3, d, 16, c), 0.3 * 0.3 * alpha(1.0, d, 16, c), 1e-12);
}

TEST(Hybrid, NonnegativeZeroAtOriginMonotone) {
  auto c = net(5, 16, 16);
  auto d = FlowSizeDistribution::pareto(1.1, 1e5, 1e10);
  double prev = 0;
  for (int i = 0; i <= 20; ++i) {
    const double v = dct_hybrid_uniform(i / 20.0, d, 0.8, c, 2.6);
    if (i == 0) EXPECT_EQ(v, 0);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Throughput, RotorAndExpanderClosedForms) {
  auto c = net(0, 32, 0);
  EXPECT_EQ(throughput_star(System::rotor, 0.5, {0.49, 1, std::nullopt}, c), 1.0);
  for (int i = 12; i <= 20; ++i)
    EXPECT_LT(throughput_star(System::rotor, i / 20.0, {0.49, 1, std::nullopt}, c), 1.0);
  EXPECT_NEAR(throughput_star(System::expander, 1.0, {1, 1.85, std::nullopt}, c), 0.5405, 1e-3);
  EXPECT_THROW(throughput_star(System::rotor, 0, {0.5, 1, std::nullopt}, c), ValidationError);
  EXPECT_THROW(throughput_star(System::hybrid, 0.5, {0.5, 1, std::nullopt}, c), ValidationError);
}

TEST(Throughput, MonotoneAndProportional) {
  auto c = net(5, 16, 16);
  auto d = equal_ratio_mixture(1e7, 1e9);
  for (auto sys : {System::expander, System::rotor, System::hybrid}) {
    double prev = 1.0;
    for (double x : grid21()) {
      const double L = throughput_star(sys, x, {0.6, 1.85, d}, c);
      EXPECT_GT(L, 0);
      EXPECT_LE(L, 1.0);
      EXPECT_LE(L, prev + 1e-6) << to_string(sys) << " x=" << x;
      prev = L;
    }
    EXPECT_EQ(throughput_star(sys, 1.0 / 21, {0.6, 1.85, d}, c), 1.0) << to_string(sys);
  }
}

TEST(Throughput, HybridBisectionAgainstScan) {
  auto c = net(5, 16, 16);
  const double large = 1e9, w_large = 0.4;
  auto d = FlowSizeDistribution::two_point_by_bytes(large, w_large, 1e7);
  const double full = c.k() * c.rate_bps;
  const double u_m = full * (1 - w_large), u_l = full * w_large;
  const double z = c.k_c / (u_l * (c.cache_reconfig_s / large + 1 / c.rate_bps));
  for (double x : {0.3, 0.6, 0.9}) {
    const double phi = 0.5;
    auto lhs = [&](double L) {
      const double spill = std::max((L - z) / L, 0.0);
      return x * L * ((u_m + spill * u_l) / c.medium_bits()) * (2 - phi * x) * 110e-6 / c.k_r;
    };
    double scan = 0;
    for (int i = 1; i <= 1000000; ++i)
      if (lhs(i / 1e6) <= 1) scan = i / 1e6;
    auto r = solve_hybrid_throughput(x, phi, d, c);
    EXPECT_NEAR(r.L, scan, 2e-6) << x;
    if (r.L < 1) EXPECT_LE(std::abs(lhs(r.L) - 1), 1e-5);
    EXPECT_LE(r.iterations, 60);
  }
}

TEST(Throughput, HybridWithoutLargeFlowsEqualsRotor) {
  auto c = net(0, 32, 0);
  auto d = FlowSizeDistribution::log_uniform(1e6, 64e6);
  for (double x : grid21()) {
    const double rotor = throughput_star(System::rotor, x, {0.4, 1, std::nullopt}, c);
    EXPECT_NEAR(throughput_star(System::hybrid, x, {0.4, 1, d}, c), rotor, 2e-6);
  }
}

TEST(Analyze, ReportInvariants) {
  auto c = net(5, 16, 16);
  ReportInputs in;
  in.distribution = equal_ratio_mixture(1e7, 2.5e8);
  in.epl_full = 1.87;
  in.epl_static = 3.2;
  for (double x : {0.0, 0.2, 0.5, 1.0})
    for (double phi : {0.0, 0.5, 1.0}) {
      in.x = x;
      in.phi = phi;
      auto r = analyze(in, c);
      EXPECT_EQ(r.k_r_star + r.k_c_star, c.k_r + c.k_c);
      EXPECT_GE(r.dct_expander_s, 0);
      EXPECT_GE(r.dct_rotor_s, 0);
      EXPECT_GE(r.dct_hybrid_s, 0);
      EXPECT_GE(r.z, 0);
      EXPECT_GE(r.x_star, 0);
      EXPECT_LE(r.x_star, 1);
      for (double L : {r.L_star_expander, r.L_star_rotor, r.L_star_hybrid}) {
        EXPECT_GT(L, 0);
        EXPECT_LE(L, 1);
      }
      if (x == 0) {
        EXPECT_EQ(r.dct_hybrid_s, 0);
        EXPECT_EQ(r.L_star_hybrid, 1);
      }
    }
}

TEST(Skewed, DctEqualsOneAtThroughputStar) {
  auto rotor = net(0, 32, 0);
  auto hyb = net(5, 16, 16);
  auto d = equal_ratio_mixture(1e7, 1e9);
  for (double x : grid21()) {
    const double phi = 0.49;
    const double Lr = throughput_star(System::rotor, x, {phi, 1, std::nullopt}, rotor);
    const double Le = throughput_star(System::expander, x, {phi, 1.85, std::nullopt}, rotor);
    const double Lh = throughput_star(System::hybrid, x, {phi, 1.85, d}, hyb);
    if (Lr < 1) EXPECT_NEAR(dct_rotor_skewed(Lr, x, phi, rotor), 1.0, 1e-12);
    else EXPECT_LE(dct_rotor_skewed(Lr, x, phi, rotor), 1.0);
    if (Le < 1) EXPECT_NEAR(dct_expander_skewed(Le, x, 1.85), 1.0, 1e-12);
    auto b = hybrid_components_skewed(Lh, x, d, phi, hyb, 2.0);
    if (Lh < 1) EXPECT_NEAR(b.rotor_s, 1.0, 1e-5);
    EXPECT_LE(b.cache_s, 1.0 + 1e-12);
  }
}

TEST(Skewed, FullActiveSetMatchesUniformLoad) {
  // With every ToR active at load L the skewed rotor form is the uniform one
  // at x = L with the skew scaled by the active fraction.
  auto c = net(0, 32, 0);
  for (double L : {0.2, 0.7, 1.0}) EXPECT_NEAR(dct_rotor_skewed(L, 1.0, 0.6, c), dct_rotor(L, 0.6, c), 1e-12);
  EXPECT_EQ(dct_rotor_skewed(0, 0.5, 0.5, c), 0);
  EXPECT_THROW(dct_rotor_skewed(1.5, 0.5, 0.5, c), ValidationError);
}
