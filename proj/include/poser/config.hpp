#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "poser/types.hpp"

namespace poser {

struct WorldConfig {
  // Region and deployment.
  double region_width = 500.0;
  double region_height = 500.0;
  double density = 1.4e-3;  // nodes / m^2
  int node_count = -1;      // explicit count overrides density when >= 0

  // Ranges (m).
  double r_lps = 30.0;
  double r_r = 15.0;
  double r_c = 120.0;
  std::vector<double> hps_ranges = {30.0, 36.0, 42.0, 48.0, 54.0, 60.0};
  double delta_r = 6.0;

  // Sensing.
  double alpha = 0.95;
  double beta = 0.0036;
  double p_fa = 0.01;
  double p_d = 0.95;
  double sigma_r = 0.075;
  double sigma_phi = deg2rad(0.25);
  double sigma_vx = 0.1;
  double sigma_vy = 0.1;
  double sigma_vpsi = deg2rad(0.1);
  double mu_cl = 0.025;

  // Power (W, W/m) and energy (J).
  double e_clock = 0.01;
  double e_lps = 0.115;
  double e_dpu = 1.0;
  double e_tx = 1.26;
  double e_rx = 0.63;
  double w_hps = 0.2;
  double e0 = 137592.0;
  double dt = 0.5;

  // Selection and game.
  int n_sel = 3;
  int n_sel_prime = 5;
  double p_sleep = 0.5;
  double p_rand = 0.5;
  double delta = 0.1;
  double db1 = 0.5;
  double db2 = 0.5;
  double xi = -1.0;  // <= 0 means (R_1^2 sigma_phi^2 + sigma_R^2) / 2
  int grid_u = 10;
  int grid_v = 10;
  int maxlogit_iterations = 500;
  double tau = 0.01;

  // Tracking.
  int confirm_m = 2;
  int confirm_n = 3;
  double v_max = 15.0;
  double gate = 9.21;        // chi-square 0.99, 2 dof
  double t2ta_gate5 = 15.086;  // chi-square 0.99, 5 dof

  // Baselines.
  double fixed_range = 30.0;

  // Lifetime.
  double eta = 1.0;

  // Listed in the parameter table without a definition; kept for completeness.
  double chi = 0.1;

  std::uint64_t seed = 1;

  double r1() const { return hps_ranges.front(); }
  double rl() const { return hps_ranges.back(); }
  double trust_tolerance() const {
    if (xi > 0.0) return xi;
    return (r1() * r1() * sigma_phi * sigma_phi + sigma_r * sigma_r) / 2.0;
  }
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, std::vector<std::string> failures)
      : std::runtime_error(msg), failures_(std::move(failures)) {}
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::vector<std::string> failures_;
};

inline double slope_lower_bound(double delta_r, int n_sel_prime, double r_l, double delta) {
  if (delta_r <= 0.0 || n_sel_prime <= 0 || r_l <= 0.0 || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("slope_lower_bound: inputs must be positive and delta in (0,1)");
  return delta_r / (static_cast<double>(n_sel_prime) * r_l * delta);
}

inline std::vector<std::string> config_violations(const WorldConfig& c) {
  std::vector<std::string> bad;
  auto prob = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) bad.push_back(std::string("probability out of [0,1]: ") + name);
  };
  if (c.hps_ranges.empty()) {
    bad.push_back("hps_ranges empty");
    return bad;
  }
  if (c.r_c < 2.0 * c.rl()) bad.push_back("R_c < 2·R_L");
  for (std::size_t i = 1; i < c.hps_ranges.size(); ++i) {
    const double step = c.hps_ranges[i] - c.hps_ranges[i - 1];
    if (!(step > 0.0)) {
      bad.push_back("hps_ranges not strictly increasing");
      break;
    }
    if (std::abs(step - c.delta_r) > 1e-9) {
      bad.push_back("hps_ranges step differs from ΔR");
      break;
    }
  }
  if (c.hps_ranges.front() <= 0.0) bad.push_back("R_1 must be positive");
  if (!(c.n_sel_prime > c.n_sel && c.n_sel > 1)) bad.push_back("N'_sel > N_sel > 1 violated");
  prob(c.alpha, "alpha");
  prob(c.p_fa, "p_fa");
  prob(c.p_d, "p_d");
  prob(c.p_sleep, "p_sleep");
  prob(c.p_rand, "p_rand");
  prob(c.eta, "eta");
  if (!(c.delta > 0.0 && c.delta < 1.0)) {
    bad.push_back("δ must lie in (0,1)");
  } else if (c.delta_r > 0.0 && c.n_sel_prime > 0 && c.rl() > 0.0) {
    if (!(c.db1 > slope_lower_bound(c.delta_r, c.n_sel_prime, c.rl(), c.delta))) bad.push_back("slope bound violated");
  }
  if (!(c.db2 > 0.0)) bad.push_back("Δb_2 must be > 0");
  if (!(c.dt > 0.0)) bad.push_back("ΔT must be > 0");
  if (!(c.e0 >= 0.0)) bad.push_back("E_0 must be >= 0");
  if (c.r_r > c.r_lps) bad.push_back("R_r > R_LPS");
  if (c.grid_u < 1 || c.grid_v < 1) bad.push_back("grid must have at least one cell");
  if (c.maxlogit_iterations < 1) bad.push_back("maxlogit iterations must be >= 1");
  if (!(c.tau > 0.0)) bad.push_back("τ must be > 0");
  if (!(c.confirm_m >= 1 && c.confirm_m <= c.confirm_n)) bad.push_back("need 1 <= M <= N");
  if (c.density < 0.0) bad.push_back("density must be >= 0");
  return bad;
}

inline const WorldConfig& validate_config(const WorldConfig& c) {
  auto bad = config_violations(c);
  if (!bad.empty()) {
    std::string msg = "invalid config:";
    for (const auto& b : bad) msg += " [" + b + "]";
    throw ConfigError(msg, std::move(bad));
  }
  return c;
}

inline std::vector<double> make_ranges(double r1, double delta_r, double r_l) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double r = r1 + i * delta_r;
    if (r > r_l + 1e-9) break;
    out.push_back(r);
  }
  return out;
}

}  // namespace poser
