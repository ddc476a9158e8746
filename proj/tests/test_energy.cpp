#include <gtest/gtest.h>

#include "poser/energy.hpp"

using namespace poser;

TEST(StepEnergy, HandSums) {
  WorldConfig c;
  EXPECT_NEAR(step_energy(flags_for_mode(NodeMode::hps, 1, 30), c, 0.5), 4.45, 1e-12);
  EXPECT_NEAR(step_energy(flags_for_mode(NodeMode::sleep, 0, 0), c, 0.5), 0.505, 1e-12);
  EXPECT_EQ(step_energy(DeviceFlags{}, c, 0.5), 0.0);
  EXPECT_NEAR(step_energy(flags_for_mode(NodeMode::lps, 0, 0), c, 0.5), (0.115 + 1 + 0.63 + 0.01) * 0.5, 1e-12);
}

TEST(StepEnergy, FlagsFollowMode) {
  const auto s = flags_for_mode(NodeMode::sleep, 3, 30);
  EXPECT_TRUE(s.clock && s.dpu);
  EXPECT_FALSE(s.lps || s.hps || s.tx || s.rx);
  const auto l = flags_for_mode(NodeMode::lps, 0, 30);
  EXPECT_TRUE(l.lps && l.tx && l.rx && l.dpu);
  EXPECT_FALSE(l.hps);
  const auto h = flags_for_mode(NodeMode::hps, 0, 30);
  EXPECT_TRUE(h.hps && h.tx && h.rx && h.dpu);
  EXPECT_FALSE(h.lps);
}

TEST(StepEnergy, StateCostOrdering) {
  WorldConfig c;
  const double sl = step_energy(flags_for_mode(NodeMode::sleep, 0, 0), c, c.dt);
  const double lp = step_energy(flags_for_mode(NodeMode::lps, 0, 0), c, c.dt);
  const double h1 = step_energy(flags_for_mode(NodeMode::hps, 0, c.r1()), c, c.dt);
  const double hl = step_energy(flags_for_mode(NodeMode::hps, 0, c.rl()), c, c.dt);
  EXPECT_LT(sl, lp);
  EXPECT_LT(lp, h1);
  EXPECT_LT(h1, hl);
}

TEST(StepEnergy, HpsLinearInRange) {
  WorldConfig c;
  auto hps = [&](double r) {
    DeviceFlags f;
    f.hps = true;
    f.hps_range = r;
    return step_energy(f, c, 0.5);
  };
  EXPECT_NEAR(hps(30) + hps(42), hps(72), 1e-12);
}

TEST(StepEnergy, Errors) {
  WorldConfig c;
  EXPECT_THROW(step_energy(flags_for_mode(NodeMode::hps, -1, 30), c, 0.5), std::invalid_argument);
  EXPECT_THROW(step_energy(flags_for_mode(NodeMode::hps, 0, 30), c, 0.0), std::invalid_argument);
}

TEST(Ledger, ChargeAndDeath) {
  EnergyLedger l;
  l.e0 = 137592;
  charge(l, Device::dpu, 0.0);
  EXPECT_EQ(l.consumed_total, 0.0);
  EXPECT_FALSE(l.dead());
  charge(l, Device::hps, 137592);
  EXPECT_EQ(l.remaining_fraction(), 0.0);
  EXPECT_TRUE(l.dead());
  charge(l, Device::tx, 10);
  EXPECT_EQ(l.remaining_fraction(), 0.0);
  EXPECT_THROW(charge(l, Device::tx, -1), std::invalid_argument);
}

TEST(Ledger, TotalIsSumOfDevices) {
  WorldConfig c;
  EnergyLedger l;
  l.e0 = c.e0;
  double prev = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto mode = static_cast<NodeMode>(k % 3);
    charge(l, device_energy(flags_for_mode(mode, k % 2, 36), c, c.dt));
    EXPECT_GE(l.consumed_total, prev);
    prev = l.consumed_total;
  }
  double s = 0.0;
  for (double v : l.per_device) s += v;
  EXPECT_NEAR(s, l.consumed_total, 1e-9);
}

TEST(Lifetime, LinearDepletion) {
  EnergyTrace t;
  t.e0 = {100.0};
  for (int k = 1; k <= 200; ++k) {
    t.time.push_back(k);
    t.consumed.push_back({1.0 * k});
  }
  EXPECT_DOUBLE_EQ(*network_lifetime(t, {0}, 0.5), 50.0);
  EXPECT_DOUBLE_EQ(*network_lifetime(t, {0}, 1.0), 100.0);
}

TEST(Lifetime, SlowestNodeAtFullEta) {
  EnergyTrace t;
  t.e0 = {10.0, 20.0, 5.0};
  for (int k = 1; k <= 40; ++k) {
    t.time.push_back(k);
    t.consumed.push_back({1.0 * k, 1.0 * k, 0.0});
  }
  EXPECT_DOUBLE_EQ(*network_lifetime(t, {0, 1}, 1.0), 20.0);
  EXPECT_FALSE(network_lifetime(t, {0, 2}, 1.0).has_value());
  EXPECT_THROW(network_lifetime(t, {}, 1.0), std::invalid_argument);
}

TEST(Lifetime, FullEnergyNeverReached) {
  EnergyTrace t;
  t.e0 = {5.0};
  t.time = {1, 2, 3};
  t.consumed = {{0}, {0}, {0}};
  EXPECT_FALSE(network_lifetime(t, {0}, 0.5).has_value());
}

TEST(Tube, Membership) {
  std::vector<Point2D> nodes{{10, 30}, {10, 30.1}, {-5, 0}, {600, -30}};
  const auto m = tube_membership(nodes, {{0, 0}, {600, 0}}, 30);
  EXPECT_EQ(m, (std::vector<NodeId>{0, 2, 3}));
  EXPECT_THROW(tube_membership(nodes, {{0, 0}}, 30), std::invalid_argument);
  EXPECT_THROW(tube_membership(nodes, {{1, 1}, {1, 1}}, 30), std::invalid_argument);
}

TEST(Tube, CorridorFootprint) {
  // A 600 m lane at y = R_L inside a 2 R_L high strip keeps every node within R_L.
  std::vector<Point2D> nodes;
  for (int i = 0; i <= 60; ++i)
    for (int j = 0; j <= 12; ++j) nodes.push_back({10.0 * i, 10.0 * j});
  const auto m = tube_membership(nodes, {{0, 60}, {600, 60}}, 60);
  EXPECT_EQ(m.size(), nodes.size());
}
