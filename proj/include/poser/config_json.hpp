#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "poser/config.hpp"
#include "poser/types.hpp"

namespace poser {

using json = nlohmann::json;

inline json to_json(const WorldConfig& c) {
  return json{
      {"region_width", c.region_width},
      {"region_height", c.region_height},
      {"density", c.density},
      {"node_count", c.node_count},
      {"r_lps", c.r_lps},
      {"r_r", c.r_r},
      {"r_c", c.r_c},
      {"hps_ranges", c.hps_ranges},
      {"delta_r", c.delta_r},
      {"alpha", c.alpha},
      {"beta", c.beta},
      {"p_fa", c.p_fa},
      {"p_d", c.p_d},
      {"sigma_r", c.sigma_r},
      {"sigma_phi_deg", c.sigma_phi * 180.0 / kPi},
      {"sigma_vx", c.sigma_vx},
      {"sigma_vy", c.sigma_vy},
      {"sigma_vpsi_deg", c.sigma_vpsi * 180.0 / kPi},
      {"mu_cl", c.mu_cl},
      {"e_clock", c.e_clock},
      {"e_lps", c.e_lps},
      {"e_dpu", c.e_dpu},
      {"e_tx", c.e_tx},
      {"e_rx", c.e_rx},
      {"w_hps", c.w_hps},
      {"e0", c.e0},
      {"dt", c.dt},
      {"n_sel", c.n_sel},
      {"n_sel_prime", c.n_sel_prime},
      {"p_sleep", c.p_sleep},
      {"p_rand", c.p_rand},
      {"delta", c.delta},
      {"db1", c.db1},
      {"db2", c.db2},
      {"xi", c.xi},
      {"grid_u", c.grid_u},
      {"grid_v", c.grid_v},
      {"maxlogit_iterations", c.maxlogit_iterations},
      {"tau", c.tau},
      {"confirm_m", c.confirm_m},
      {"confirm_n", c.confirm_n},
      {"v_max", c.v_max},
      {"gate", c.gate},
      {"t2ta_gate5", c.t2ta_gate5},
      {"fixed_range", c.fixed_range},
      {"eta", c.eta},
      {"chi", c.chi},
      {"seed", c.seed},
  };
}

namespace detail {
inline void reject_unknown(const json& j, const json& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object", {where + " must be an object"});
  std::vector<std::string> bad;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key())) bad.push_back("unknown key: " + where + "." + it.key());
  if (!bad.empty()) throw ConfigError("config has unknown keys", bad);
}
}  // namespace detail

inline WorldConfig world_from_json(const json& j, WorldConfig c = {}) {
  detail::reject_unknown(j, to_json(c), "world");
  auto get = [&](const char* k, auto& v) {
    if (j.contains(k)) j.at(k).get_to(v);
  };
  get("region_width", c.region_width);
  get("region_height", c.region_height);
  get("density", c.density);
  get("node_count", c.node_count);
  get("r_lps", c.r_lps);
  get("r_r", c.r_r);
  get("r_c", c.r_c);
  get("hps_ranges", c.hps_ranges);
  get("delta_r", c.delta_r);
  get("alpha", c.alpha);
  get("beta", c.beta);
  get("p_fa", c.p_fa);
  get("p_d", c.p_d);
  get("sigma_r", c.sigma_r);
  if (j.contains("sigma_phi_deg")) c.sigma_phi = deg2rad(j.at("sigma_phi_deg").get<double>());
  get("sigma_vx", c.sigma_vx);
  get("sigma_vy", c.sigma_vy);
  if (j.contains("sigma_vpsi_deg")) c.sigma_vpsi = deg2rad(j.at("sigma_vpsi_deg").get<double>());
  get("mu_cl", c.mu_cl);
  get("e_clock", c.e_clock);
  get("e_lps", c.e_lps);
  get("e_dpu", c.e_dpu);
  get("e_tx", c.e_tx);
  get("e_rx", c.e_rx);
  get("w_hps", c.w_hps);
  get("e0", c.e0);
  get("dt", c.dt);
  get("n_sel", c.n_sel);
  get("n_sel_prime", c.n_sel_prime);
  get("p_sleep", c.p_sleep);
  get("p_rand", c.p_rand);
  get("delta", c.delta);
  get("db1", c.db1);
  get("db2", c.db2);
  get("xi", c.xi);
  get("grid_u", c.grid_u);
  get("grid_v", c.grid_v);
  get("maxlogit_iterations", c.maxlogit_iterations);
  get("tau", c.tau);
  get("confirm_m", c.confirm_m);
  get("confirm_n", c.confirm_n);
  get("v_max", c.v_max);
  get("gate", c.gate);
  get("t2ta_gate5", c.t2ta_gate5);
  get("fixed_range", c.fixed_range);
  get("eta", c.eta);
  get("chi", c.chi);
  get("seed", c.seed);
  return c;
}

// Sweep and scenario settings that sit next to the world parameters.
struct RunSpec {
  std::vector<std::string> schedulers = {"poser"};
  std::vector<double> densities;     // empty: world.density
  std::vector<double> p_sleeps;      // empty: world.p_sleep
  std::vector<double> fixed_ranges;  // empty: world.fixed_range
  std::vector<int> lambdas = {1};
  int runs = 100;
  std::uint64_t seed = 1;
  int steps = 200;
  double target_speed = 5.0;
  double lane_y = -1.0;  // < 0: random lane
  double gap_radius = 0.0;
  double gap_time = 50.0;
  bool tube = false;       // lifetime mode: straight lane, tube of radius R_LPS
  int max_steps = 20000;   // lifetime horizon
  int parallel = 1;
};

inline json to_json(const RunSpec& r) {
  return json{{"schedulers", r.schedulers}, {"densities", r.densities},       {"p_sleeps", r.p_sleeps},
              {"fixed_ranges", r.fixed_ranges}, {"lambdas", r.lambdas},     {"runs", r.runs},
              {"seed", r.seed},             {"steps", r.steps},             {"target_speed", r.target_speed},
              {"lane_y", r.lane_y},         {"gap_radius", r.gap_radius},   {"gap_time", r.gap_time},
              {"tube", r.tube},             {"max_steps", r.max_steps},     {"parallel", r.parallel}};
}

inline RunSpec run_from_json(const json& j, RunSpec r = {}) {
  detail::reject_unknown(j, to_json(r), "run");
  auto get = [&](const char* k, auto& v) {
    if (j.contains(k)) j.at(k).get_to(v);
  };
  get("schedulers", r.schedulers);
  get("densities", r.densities);
  get("p_sleeps", r.p_sleeps);
  get("fixed_ranges", r.fixed_ranges);
  get("lambdas", r.lambdas);
  get("runs", r.runs);
  get("seed", r.seed);
  get("steps", r.steps);
  get("target_speed", r.target_speed);
  get("lane_y", r.lane_y);
  get("gap_radius", r.gap_radius);
  get("gap_time", r.gap_time);
  get("tube", r.tube);
  get("max_steps", r.max_steps);
  get("parallel", r.parallel);
  return r;
}

inline std::vector<std::string> run_spec_violations(const RunSpec& r) {
  std::vector<std::string> v;
  if (r.schedulers.empty()) v.push_back("schedulers sweep is empty");
  if (r.lambdas.empty()) v.push_back("lambdas sweep is empty");
  if (r.runs < 1) v.push_back("runs must be >= 1");
  if (r.steps < 1) v.push_back("steps must be >= 1");
  if (r.parallel < 1) v.push_back("parallel must be >= 1");
  if (r.gap_radius < 0.0) v.push_back("gap_radius must be >= 0");
  for (int l : r.lambdas)
    if (l < 0) v.push_back("lambda must be >= 0");
  for (const auto& s : r.schedulers)
    if (s != "poser" && s != "ans" && s != "lpshps" && s != "random") v.push_back("unknown scheduler: " + s);
  return v;
}

struct ConfigDocument {
  WorldConfig world;
  RunSpec run;
};

inline json to_json(const ConfigDocument& d) { return json{{"world", to_json(d.world)}, {"run", to_json(d.run)}}; }

inline ConfigDocument document_from_json(const json& j) {
  detail::reject_unknown(j, json{{"world", 0}, {"run", 0}}, "document");
  ConfigDocument d;
  if (j.contains("world")) d.world = world_from_json(j.at("world"));
  if (j.contains("run")) d.run = run_from_json(j.at("run"));
  return d;
}

inline ConfigDocument load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path, {"cannot open " + path});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(), {"invalid JSON"});
  }
  try {
    return document_from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value: ") + e.what(), {"bad value"});
  }
}

// 64-bit FNV-1a over the canonical JSON dump.
inline std::uint64_t config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

}  // namespace poser
