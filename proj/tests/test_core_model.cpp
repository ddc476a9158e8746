#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "poser/config.hpp"
#include "poser/deployment.hpp"
#include "poser/rng.hpp"

using namespace poser;

namespace {

bool mentions(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

WorldConfig slope_case() {
  WorldConfig c;
  c.hps_ranges = make_ranges(30.0, 5.0, 60.0);
  c.delta_r = 5.0;
  c.delta = 0.035;
  c.db1 = 0.5;
  c.db2 = 0.5;
  c.n_sel_prime = 5;
  return c;
}

}  // namespace

TEST(Config, DefaultsAreValid) {
  WorldConfig c;
  EXPECT_TRUE(config_violations(c).empty());
  EXPECT_NO_THROW(validate_config(c));
}

TEST(Config, TableValuesWithTightSlopeAreValid) {
  const auto c = slope_case();
  ASSERT_EQ(c.hps_ranges.size(), 7u);
  EXPECT_TRUE(config_violations(c).empty());
}

TEST(Config, ZeroSlopeViolatesBound) {
  auto c = slope_case();
  c.db1 = 0.0;
  EXPECT_TRUE(mentions(config_violations(c), "slope bound violated"));
  try {
    validate_config(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(mentions(e.failures(), "slope bound violated"));
  }
}

TEST(Config, CommunicationRangeBound) {
  WorldConfig c;
  c.r_c = 100.0;
  EXPECT_TRUE(mentions(config_violations(c), "R_c < 2·R_L"));
  c.r_c = 120.0;
  EXPECT_FALSE(mentions(config_violations(c), "R_c < 2·R_L"));
}

TEST(Config, ReportsEveryFailure) {
  WorldConfig c;
  c.r_c = 10.0;
  c.p_fa = 2.0;
  c.n_sel_prime = 2;
  const auto v = config_violations(c);
  EXPECT_TRUE(mentions(v, "R_c < 2·R_L"));
  EXPECT_TRUE(mentions(v, "probability out of [0,1]: p_fa"));
  EXPECT_TRUE(mentions(v, "N'_sel > N_sel > 1 violated"));
}

TEST(Config, SlopeLowerBound) {
  EXPECT_NEAR(slope_lower_bound(5, 5, 60, 0.035), 5.0 / (5 * 60 * 0.035), 1e-15);
  EXPECT_NEAR(slope_lower_bound(5, 5, 60, 0.035), 0.47619, 1e-5);
  EXPECT_NEAR(slope_lower_bound(6, 5, 60, 0.1), 0.2, 1e-15);
  EXPECT_THROW(slope_lower_bound(6, 5, 60, 1.0), std::invalid_argument);
}

TEST(Config, TrustToleranceDefault) {
  WorldConfig c;
  const double s = 0.25 * kPi / 180.0;
  EXPECT_NEAR(c.trust_tolerance(), (900.0 * s * s + 0.075 * 0.075) / 2.0, 1e-15);
  EXPECT_NEAR(c.trust_tolerance(), 0.01138, 5e-5);
}

TEST(Config, MakeRanges) {
  const auto r = make_ranges(30, 6, 60);
  EXPECT_EQ(r, (std::vector<double>{30, 36, 42, 48, 54, 60}));
}

TEST(Deployment, CountFromDensity) {
  WorldConfig c;
  EXPECT_EQ(uniform_deployment(c, 1, 0).size(), 350u);
  c.density = 0.0;
  EXPECT_TRUE(uniform_deployment(c, 1, 0).empty());
  c.node_count = 7;
  EXPECT_EQ(uniform_deployment(c, 1, 0).size(), 7u);
}

TEST(Deployment, CountRoundsUp) {
  WorldConfig c;
  c.density = 1.001e-3;
  c.region_width = c.region_height = 100.0;
  EXPECT_EQ(deployment_size(c), 11);
}

TEST(Deployment, InsideRegionAndDeterministic) {
  WorldConfig c;
  c.region_width = 300;
  c.region_height = 80;
  const auto a = uniform_deployment(c, 42, 3);
  const auto b = uniform_deployment(c, 42, 3);
  const auto d = uniform_deployment(c, 42, 4);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, d);
  for (const auto& p : a) {
    EXPECT_GE(p.x, 0.0);
    EXPECT_LT(p.x, 300.0);
    EXPECT_GE(p.y, 0.0);
    EXPECT_LT(p.y, 80.0);
  }
}

TEST(Deployment, ZeroAreaThrows) {
  WorldConfig c;
  c.region_height = 0.0;
  EXPECT_THROW(uniform_deployment(c, 1, 0), std::invalid_argument);
}

TEST(Neighborhood, BoundaryInclusive) {
  std::vector<Point2D> p{{0, 0}, {120, 0}};
  EXPECT_EQ(neighborhood(0, p, 120), std::vector<NodeId>{1});
  EXPECT_EQ(neighborhood(1, p, 120), std::vector<NodeId>{0});
  p[1].x = 121;
  EXPECT_TRUE(neighborhood(0, p, 120).empty());
  EXPECT_TRUE(neighborhood(1, p, 120).empty());
}

TEST(Neighborhood, Collinear) {
  std::vector<Point2D> p{{0, 0}, {100, 0}, {200, 0}};
  EXPECT_EQ(neighborhood(0, p, 120), std::vector<NodeId>{1});
  EXPECT_EQ(neighborhood(1, p, 120), (std::vector<NodeId>{0, 2}));
  EXPECT_EQ(neighborhood(2, p, 120), std::vector<NodeId>{1});
}

TEST(Neighborhood, Symmetric) {
  WorldConfig c;
  const auto p = uniform_deployment(c, 9, 0);
  std::vector<std::vector<NodeId>> n;
  for (NodeId i = 0; i < p.size(); ++i) n.push_back(neighborhood(i, p, c.r_c));
  for (NodeId i = 0; i < p.size(); ++i)
    for (NodeId j : n[i]) {
      EXPECT_NE(i, j);
      EXPECT_TRUE(std::binary_search(n[j].begin(), n[j].end(), i));
    }
}

TEST(Rng, DeriveSeedDependsOnKeyPath) {
  EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(2, {2, 3}));
  EXPECT_NE(derive_seed(1, {2}), derive_seed(1, {2, 0}));
}

TEST(Rng, StreamsIndependentOfDrawOrder) {
  auto a = RngStream::node(5, 0, 17);
  auto other = RngStream::node(5, 0, 3);
  for (int i = 0; i < 100; ++i) other.uniform();
  auto b = RngStream::node(5, 0, 17);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.uniform(), b.uniform());
  auto e1 = RngStream::environment(5, 0);
  auto e2 = RngStream::environment(5, 1);
  EXPECT_NE(e1.uniform(), e2.uniform());
}
