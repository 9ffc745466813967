#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "tmt/config_io.hpp"

using namespace tmt;

namespace {

std::string message_of(const std::string& text) {
  try {
    parse_config(text, "t.conf");
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyTextGivesProfileDefaults) {
  auto c = validate(parse_config(""));
  EXPECT_EQ(c.profile, "paper-numeric");
  EXPECT_EQ(c.network.rate_bps, 10e9);
  EXPECT_EQ(c.sim, sim::SimOptions{});
}

TEST(Config, HumanUnitsAndComments) {
  auto c = parse_config(R"(# comment
profile = "paper-table1"
network.n = 64   # trailing
network.k_s = 5
network.k_r = 16
network.k_c = 16
link.rate_gbps = 10
timing.slot_us = 50
timing.rotor_reconfig_us = 5
timing.demand_aware_reconfig_ms = 20
traffic.distribution.kind = "two_point"
traffic.distribution.sizes_bits = "1e7, 1e9"
traffic.distribution.probabilities = "0.99, 0.01"
sim.admission = "horizon"
sim.cache_horizon_s = 2
)");
  EXPECT_EQ(c.network.n, 64);
  EXPECT_EQ(c.network.rate_bps, 10e9);
  EXPECT_EQ(c.network.slot_s, 50e-6);
  EXPECT_EQ(c.network.rotor_reconfig_s, 5e-6);
  EXPECT_EQ(c.network.cache_reconfig_s, 20e-3);
  EXPECT_EQ(c.traffic.distribution.kind(), FlowSizeDistribution::Kind::two_point);
  EXPECT_EQ(c.sim.admission, sim::CacheAdmission::horizon);
  EXPECT_EQ(c.sim.cache_horizon_s, 2);
}

TEST(Config, ProfileOverrideReplacesNetworkBase) {
  auto c = parse_config("network.n = 32\n", "t", "", "paper-table1");
  EXPECT_EQ(c.profile, "paper-table1");
  EXPECT_EQ(c.network.rate_bps, 40e9);
  EXPECT_EQ(c.network.n, 32);
  EXPECT_THROW(parse_config("", "t", "", "nope"), ValidationError);
}

TEST(Config, RoundTrip) {
  const char* texts[] = {
      "",
      "profile = \"paper-table1\"\nnetwork.k_c = 3\ntraffic.model = \"skewed\"\ntraffic.per_tor_rate_L = 0.3\n",
      "timing.slot_s = 3.3e-5\nlink.rate_bps = 12345678901\nthresholds.medium_bits = 2e6\n",
      "traffic.distribution.kind = \"pareto\"\ntraffic.distribution.shape = 1.2\ntraffic.distribution.lo_bits = 1e4\n",
      "traffic.distribution.kind = \"empirical\"\ntraffic.distribution.sizes_bits = \"1e3,1e6,1e9\"\n"
      "traffic.distribution.probabilities = \"0.5,0.3,0.2\"\nanalysis.epl = 1.9\nsim.injection = \"online\"\n",
  };
  for (const char* t : texts) {
    auto a = parse_config(t);
    auto text = serialize_config(a);
    auto b = parse_config(text);
    EXPECT_EQ(a, b) << text;
    EXPECT_EQ(serialize_config(b), text);
  }
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_NE(message_of("network.n = 4\nbogus.key = 1\n").find("t.conf:2:"), std::string::npos);
  EXPECT_NE(message_of("network.n = 4\nnetwork.n = 5\n").find("t.conf:2: duplicate"), std::string::npos);
  EXPECT_NE(message_of("\n\nnetwork.n = four\n").find("t.conf:3:"), std::string::npos);
  EXPECT_NE(message_of("no equals sign\n").find("t.conf:1:"), std::string::npos);
  EXPECT_NE(message_of("sim.admission = \"eager\"\n").find("t.conf:1:"), std::string::npos);
  EXPECT_NE(message_of("link.rate_gbps = 10\nlink.rate_bps = 1e10\n").find("both"), std::string::npos);
  EXPECT_NE(message_of("traffic.distribution.kind = \"weird\"\n").find("t.conf:1:"), std::string::npos);
}

TEST(Config, ValidateRejectsOutOfRange) {
  auto c = parse_config("analysis.phi = 1.5\n");
  EXPECT_THROW(validate(c), ValidationError);
  c = parse_config("sim.cutoff_s = 0\n");
  EXPECT_THROW(validate(c), ValidationError);
  c = parse_config("network.k_r = -2\n");
  EXPECT_THROW(validate(c), ValidationError);
}

TEST(Config, DistributionFileIsRelativeToConfig) {
  const std::string dir = ::testing::TempDir();
  {
    std::ofstream o(dir + "/sizes.csv");
    o << "size_bits,probability\n1e6,0.5\n3e6,0.5\n";
  }
  {
    std::ofstream o(dir + "/c.conf");
    o << "traffic.distribution.file = \"sizes.csv\"\n";
  }
  auto c = load_config(dir + "/c.conf");
  EXPECT_DOUBLE_EQ(c.traffic.distribution.mean(), 2e6);
  EXPECT_EQ(c.distribution_file, "sizes.csv");
  EXPECT_NE(serialize_config(c).find("traffic.distribution.file = \"sizes.csv\""), std::string::npos);
  EXPECT_THROW(load_config(dir + "/missing.conf"), ParseError);
  std::remove((dir + "/sizes.csv").c_str());
  std::remove((dir + "/c.conf").c_str());
}

TEST(Sweep, Parsing) {
  auto [v, g] = parse_sweep("load_x=0.1:0.5:0.1");
  EXPECT_EQ(v, SweepVar::load_x);
  EXPECT_EQ(g.values(), (std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5}));
  auto [v2, g2] = parse_sweep("phi=0.25");
  EXPECT_EQ(v2, SweepVar::phi);
  EXPECT_EQ(g2.values(), std::vector<double>{0.25});
  EXPECT_EQ(parse_sweep("k_c=0:32:8").second.values().size(), 5u);
  EXPECT_THROW(parse_sweep("load_x"), ValidationError);
  EXPECT_THROW(parse_sweep("speed=0:1:0.1"), ValidationError);
  EXPECT_THROW(parse_sweep("load_x=0:1"), ValidationError);
  EXPECT_THROW(parse_sweep("load_x=1:0:0.1"), ValidationError);
  EXPECT_THROW(parse_sweep("load_x=0:1:0"), ValidationError);
}

TEST(Sweep, DomainChecks) {
  auto net = validate(profile("paper-numeric"));
  RunManifest m;
  m.sweep = SweepVar::load_x;
  m.grid = {0, 1.2, 0.4};
  EXPECT_THROW(check_manifest(m, net), ValidationError);
  m.grid = {0, 1, 0.25};
  EXPECT_NO_THROW(check_manifest(m, net));
  m.sweep = SweepVar::k_c;
  m.grid = {0, 32, 4};
  EXPECT_NO_THROW(check_manifest(m, net));
  m.grid = {0, 33, 1};
  EXPECT_THROW(check_manifest(m, net), ValidationError);
  m.grid = {0.5, 0.5, 1};
  EXPECT_THROW(check_manifest(m, net), ValidationError);
  m.sweep.reset();
  m.seeds = 0;
  EXPECT_THROW(check_manifest(m, net), ValidationError);
}
