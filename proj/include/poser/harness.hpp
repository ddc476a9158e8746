#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "poser/config.hpp"
#include "poser/config_json.hpp"
#include "poser/csv.hpp"
#include "poser/dans.hpp"
#include "poser/game.hpp"
#include "poser/rng.hpp"
#include "poser/selection.hpp"
#include "poser/sim.hpp"

#ifndef POSER_VERSION
#define POSER_VERSION "0.0.0"
#endif

namespace poser {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Accumulator {
  long n = 0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double x) {
    if (std::isnan(x)) return;
    ++n;
    sum += x;
    sumsq += x * x;
  }
  void merge(const Accumulator& o) {
    n += o.n;
    sum += o.sum;
    sumsq += o.sumsq;
  }
  double mean() const { return n > 0 ? sum / n : kNaN; }
  double std_error() const {
    if (n < 2) return n == 1 ? 0.0 : kNaN;
    const double m = mean();
    const double var = std::max(0.0, (sumsq - n * m * m) / (n - 1));
    return std::sqrt(var / n);
  }
};

// ---------------------------------------------------------------- per-run metrics

struct DetectionRates {
  double pm = kNaN;        // no HPS disk covers the target
  double pm_track = kNaN;  // no confirmed track near the target
  long pairs = 0;
};

inline DetectionRates missed_detection_rate(const std::vector<StepLog>& steps) {
  DetectionRates r;
  long miss = 0, miss_t = 0;
  for (const auto& s : steps)
    for (const auto& t : s.targets) {
      if (!t.in_roi) continue;
      ++r.pairs;
      miss += !t.covered;
      miss_t += !t.tracked;
    }
  if (r.pairs > 0) {
    r.pm = static_cast<double>(miss) / r.pairs;
    r.pm_track = static_cast<double>(miss_t) / r.pairs;
  }
  return r;
}

struct RunMetrics {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double pm = kNaN;
  double pm_track = kNaN;
  double sq_pos = 0.0, sq_vel = 0.0;
  long est_pairs = 0;
  double hps_per_target = kNaN;
  double energy_near = kNaN;  // J per node-step, nodes within R_L of a target
  double energy_far = kNaN;
  double lifetime = kNaN;  // s
  std::vector<double> pdet;  // per step: 1 covered, 0 missed, NaN outside the region
};

inline RunMetrics summarize_run(const RunResult& res) {
  RunMetrics m;
  const auto rates = missed_detection_rate(res.steps);
  m.pm = rates.pm;
  m.pm_track = rates.pm_track;
  double hps = 0.0, en = 0.0, ef = 0.0;
  long nt = 0, nn = 0, nf = 0;
  for (const auto& s : res.steps) {
    m.sq_pos += s.sq_pos;
    m.sq_vel += s.sq_vel;
    m.est_pairs += s.est_pairs;
    for (const auto& t : s.targets)
      if (t.tracked) {
        hps += t.hps_near;
        ++nt;
      }
    en += s.energy_near_sum;
    nn += s.energy_near_n;
    ef += s.energy_far_sum;
    nf += s.energy_far_n;
    double p = kNaN;
    if (!s.targets.empty() && s.targets.front().in_roi) p = s.targets.front().covered ? 1.0 : 0.0;
    m.pdet.push_back(p);
  }
  if (nt > 0) m.hps_per_target = hps / nt;
  if (nn > 0) m.energy_near = en / nn;
  if (nf > 0) m.energy_far = ef / nf;
  if (res.lifetime) m.lifetime = *res.lifetime;
  return m;
}

// Position and velocity RMSE over every gated (estimate, truth) pair.
inline std::pair<double, double> rmse(const std::vector<RunMetrics>& runs) {
  double sp = 0.0, sv = 0.0;
  long n = 0;
  for (const auto& r : runs) {
    if (r.failed) continue;
    sp += r.sq_pos;
    sv += r.sq_vel;
    n += r.est_pairs;
  }
  if (n == 0) throw std::runtime_error("rmse: no associated estimate/truth pairs");
  return {std::sqrt(sp / n), std::sqrt(sv / n)};
}

// ---------------------------------------------------------------- Monte Carlo

struct Cell {
  Scheduler scheduler = Scheduler::poser;
  double density = 0.0;
  double p_sleep = 0.0;
  double fixed_range = 0.0;
  int lambda = 1;
};

inline WorldConfig cell_config(WorldConfig cfg, const Cell& c, const RunSpec& spec) {
  cfg.density = c.density;
  cfg.p_sleep = c.p_sleep;
  cfg.fixed_range = c.fixed_range;
  if (spec.tube) {
    cfg.region_height = 2.0 * cfg.rl();
    cfg.region_width = 600.0;
  }
  return cfg;
}

inline Scenario cell_scenario(const WorldConfig& cfg, const Cell& c, const RunSpec& spec) {
  Scenario sc;
  sc.scheduler = c.scheduler;
  sc.steps = spec.tube ? spec.max_steps : spec.steps;
  sc.targets = c.lambda;
  sc.target_speed = spec.target_speed;
  sc.lane_y = spec.lane_y >= 0.0 ? spec.lane_y : kNaN;
  if (spec.tube) {
    sc.lane_y = cfg.region_height / 2.0;
    sc.respawn = true;
    sc.record_energy = true;
    sc.stop_when_tube_dead = true;
    sc.tube_radius = cfg.r_lps;
  }
  if (spec.gap_radius > 0.0) {
    sc.gap = GapSpec{{0.0, 0.0}, spec.gap_radius};
    sc.gap_at_target = true;
    sc.gap_time = spec.gap_time;
  }
  return sc;
}

inline std::vector<Cell> expand_cells(const WorldConfig& base, const RunSpec& spec) {
  auto or_default = [](const std::vector<double>& v, double d) { return v.empty() ? std::vector<double>{d} : v; };
  std::vector<Cell> cells;
  for (const auto& s : spec.schedulers)
    for (double d : or_default(spec.densities, base.density))
      for (double p : or_default(spec.p_sleeps, base.p_sleep))
        for (double r : or_default(spec.fixed_ranges, base.fixed_range))
          for (int l : spec.lambdas) cells.push_back({parse_scheduler(s), d, p, r, l});
  return cells;
}

// Runs `count` seeds (seed_base + i) of one cell. Failures become rows marked failed.
inline std::vector<RunMetrics> monte_carlo(const WorldConfig& cfg, const Scenario& sc, int count,
                                           std::uint64_t seed_base, int parallel) {
  if (count < 0) throw std::invalid_argument("monte_carlo: negative run count");
  std::vector<RunMetrics> out(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      const std::uint64_t seed = seed_base + static_cast<std::uint64_t>(i);
      try {
        out[i] = summarize_run(run_scenario(cfg, sc, seed, 0));
      } catch (const std::exception& e) {
        out[i] = RunMetrics{};
        out[i].failed = true;
        out[i].error = e.what();
      }
      out[i].seed = seed;
    }
  };
  const int threads = std::max(1, std::min(parallel, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

struct CellSummary {
  Cell cell;
  int runs = 0;
  int failed = 0;
  Accumulator pm, pm_track, hps, energy_near, energy_far, lifetime;
  double rmse_pos = kNaN, rmse_vel = kNaN;
  double lifetime_norm = kNaN, lifetime_norm_se = kNaN;
};

inline CellSummary aggregate(const Cell& cell, const std::vector<RunMetrics>& runs) {
  CellSummary s;
  s.cell = cell;
  s.runs = static_cast<int>(runs.size());
  for (const auto& r : runs) {
    if (r.failed) {
      ++s.failed;
      continue;
    }
    s.pm.add(r.pm);
    s.pm_track.add(r.pm_track);
    s.hps.add(r.hps_per_target);
    s.energy_near.add(r.energy_near);
    s.energy_far.add(r.energy_far);
    s.lifetime.add(r.lifetime);
  }
  try {
    std::tie(s.rmse_pos, s.rmse_vel) = rmse(runs);
  } catch (const std::runtime_error&) {
  }
  return s;
}

inline void normalize_lifetimes(std::vector<CellSummary>& cells, double reference) {
  for (auto& c : cells) {
    if (!(reference > 0.0)) continue;
    c.lifetime_norm = c.lifetime.mean() / reference;
    c.lifetime_norm_se = c.lifetime.std_error() / reference;
  }
}

// Per-step mean detection over runs, skipping steps where the target is outside.
inline std::vector<Accumulator> detection_series(const std::vector<RunMetrics>& runs) {
  std::vector<Accumulator> out;
  for (const auto& r : runs) {
    if (r.failed) continue;
    if (r.pdet.size() > out.size()) out.resize(r.pdet.size());
    for (std::size_t k = 0; k < r.pdet.size(); ++k) out[k].add(r.pdet[k]);
  }
  return out;
}

// ---------------------------------------------------------------- EGDOP comparison

struct EgdopRow {
  double bound = 0.0;
  Accumulator savings, eff_egdop, eff_gdop, kl_egdop, kl_me;
};

// KL(N(m, A) || N(m, B)) for 2x2 covariances with equal means.
inline double gaussian_kl(const Mat2& A, const Mat2& B) {
  const double da = A.determinant(), db = B.determinant();
  if (!(da > 0.0) || !(db > 0.0)) return kNaN;
  return std::max(0.0, 0.5 * ((B.inverse() * A).trace() - 2.0 + std::log(db / da)));
}

struct EgdopOptions {
  int runs = 100;
  std::vector<double> bounds = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::uint64_t seed = 1;
  double density = 5e-3;
  double side = 200.0;
  double pos_sigma = 0.3;
};

inline std::vector<EgdopRow> egdop_comparison(const WorldConfig& cfg, const EgdopOptions& o) {
  std::vector<EgdopRow> rows;
  for (double b : o.bounds) rows.push_back({b, {}, {}, {}, {}, {}});
  const auto n_sel = static_cast<std::size_t>(cfg.n_sel);
  const double cost = cfg.w_hps * cfg.r1() * cfg.dt;
  PositionPrediction pred{{o.side / 2.0, o.side / 2.0}, Mat2::Identity() * o.pos_sigma * o.pos_sigma};
  const auto region = candidate_region(pred, cfg.r1());
  const int n_nodes = static_cast<int>(std::lround(o.density * o.side * o.side));
  for (int run = 0; run < o.runs; ++run) {
    RngStream rng(derive_seed(o.seed, {static_cast<std::uint64_t>(run), static_cast<std::uint64_t>(StreamTag::instance)}));
    std::vector<Point2D> pos;
    std::vector<double> u;
    std::vector<Candidate> base;
    // Redraw until the region holds more candidates than are selected.
    for (int attempt = 0; attempt < 1000; ++attempt) {
      pos.clear();
      u.clear();
      for (int i = 0; i < n_nodes; ++i) {
        pos.push_back({rng.uniform(0.0, o.side), rng.uniform(0.0, o.side)});
        u.push_back(rng.uniform());
      }
      std::vector<Candidate> all;
      for (int i = 0; i < n_nodes; ++i) all.push_back({static_cast<NodeId>(i), pos[i], 1.0});
      base = candidate_set(region, all);
      if (base.size() > n_sel) break;
    }
    if (base.size() <= n_sel) continue;
    for (auto& row : rows) {
      auto cands = base;
      for (auto& c : cands) c.energy = row.bound + (1.0 - row.bound) * u[c.id];
      const auto eg = select_by_egdop(cands, n_sel, region, cfg);
      const auto gd = select_by_gdop(cands, n_sel, region, cfg);
      const auto me = select_max_energy(cands, n_sel);
      auto predicted = [&](const std::vector<Candidate>& s) {
        double e = 0.0;
        for (const auto& c : s) e += c.energy * cfg.e0 - cost;
        return e;
      };
      const double e_eg = predicted(eg), e_gd = predicted(gd), e_me = predicted(me);
      row.savings.add((e_eg - e_gd) / (cfg.n_sel * cfg.e0) * 100.0);
      row.eff_egdop.add(e_eg / e_me);
      row.eff_gdop.add(e_gd / e_me);
      auto cov = [&](const std::vector<Candidate>& s) -> std::optional<Mat2> {
        const Mat2 J = info_matrix(s, region, cfg, false);
        if (!(J.determinant() > 0.0)) return std::nullopt;
        return Mat2(J.inverse());
      };
      const auto cg = cov(gd), ce = cov(eg), cm = cov(me);
      if (cg && ce) row.kl_egdop.add(gaussian_kl(*cg, *ce));
      if (cg && cm) row.kl_me.add(gaussian_kl(*cg, *cm));
    }
  }
  return rows;
}

// ---------------------------------------------------------------- game validation

struct GameValidationRow {
  int n_prime = 0;
  int games = 0;
  int runs_used = 0;
  int nonpositive_opt = 0;
  Accumulator chi, phi_eff, t_game, t_opt;
};

struct GameValidationOptions {
  int games = 200;
  int per_run = 10;
  int max_runs = 400;
  std::uint64_t seed = 1;
  double density = 1.4e-3;
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Games come from simulated runs with an R_1-sized gap on the target's path.
inline GameValidationRow game_validation(WorldConfig cfg, int n_prime, const GameValidationOptions& o) {
  cfg.n_sel_prime = n_prime;
  cfg.density = o.density;
  GameValidationRow row;
  row.n_prime = n_prime;
  Scenario sc;
  sc.lane_y = cfg.region_height / 2.0;
  sc.steps = 200;
  sc.gap = GapSpec{{0.0, 0.0}, cfg.r1()};
  sc.gap_at_target = true;
  sc.collect_games = true;
  for (int run = 0; run < o.max_runs && row.games < o.games; ++run) {
    const auto res = run_scenario(cfg, sc, o.seed + static_cast<std::uint64_t>(run), 0, false);
    std::vector<const GameRecord*> pool;
    for (const auto& s : res.steps)
      for (const auto& g : s.game_records)
        if (static_cast<int>(g.game.players()) == n_prime) pool.push_back(&g);
    if (pool.empty()) continue;
    ++row.runs_used;
    const std::size_t take = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(o.per_run));
    for (std::size_t i = 0; i < take && row.games < o.games; ++i) {
      const auto& game = pool[i * pool.size() / take]->game;
      RngStream rng(derive_seed(o.seed, {static_cast<std::uint64_t>(StreamTag::game), static_cast<std::uint64_t>(run), i}));
      auto t0 = std::chrono::steady_clock::now();
      const auto eq = maxlogit_solve(game, cfg.maxlogit_iterations, cfg.tau, rng);
      row.t_game.add(seconds_since(t0));
      t0 = std::chrono::steady_clock::now();
      const auto opt = exhaustive_optimum(game);
      row.t_opt.add(seconds_since(t0));
      row.chi.add(coverage_degree_mass(eq.action, game, cfg.n_sel));
      if (opt.phi > 0.0)
        row.phi_eff.add(eq.phi / opt.phi);
      else
        ++row.nonpositive_opt;
      ++row.games;
    }
  }
  return row;
}

// ---------------------------------------------------------------- equilibrium coverage statistic

struct EquilibriumCoverageOptions {
  int instances = 200;
  std::uint64_t seed = 1;
  double sigma_min = 0.5;
  double sigma_max = 5.0;
};

// Random instances where some N_sel players can cover the whole uncertainty box
// at R_L; returns the worth mass covered exactly N_sel times at the learned action.
inline Accumulator equilibrium_coverage(const WorldConfig& cfg, const EquilibriumCoverageOptions& o) {
  Accumulator acc;
  const double rl = cfg.rl();
  for (int inst = 0; inst < o.instances; ++inst) {
    RngStream rng(derive_seed(o.seed, {static_cast<std::uint64_t>(StreamTag::instance), static_cast<std::uint64_t>(inst)}));
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double sx = rng.uniform(o.sigma_min, std::min(o.sigma_max, rl / 6.0));
      const double sy = rng.uniform(o.sigma_min, std::min(o.sigma_max, rl / 6.0));
      const double rho = rng.uniform(-0.5, 0.5);
      Mat2 cov;
      cov << sx * sx, rho * sx * sy, rho * sx * sy, sy * sy;
      const Point2D mean{0.0, 0.0};
      std::vector<NodeId> ids;
      std::vector<Point2D> pos;
      for (int p = 0; p < cfg.n_sel_prime; ++p) {
        const double r = rl * std::sqrt(rng.uniform());
        const double th = rng.uniform(-kPi, kPi);
        ids.push_back(static_cast<NodeId>(p));
        pos.push_back({r * std::cos(th), r * std::sin(th)});
      }
      const auto game = make_game(ids, pos, mean, cov, cfg);
      int full = 0;
      const std::size_t top = game.n_actions() - 1;
      for (std::size_t p = 0; p < game.players(); ++p) {
        bool all = true;
        for (std::size_t c = 0; c < game.grid.cells() && all; ++c) all = game.covers(p, static_cast<int>(top), c);
        full += all;
      }
      if (full < cfg.n_sel) continue;
      const auto eq = maxlogit_solve(game, cfg.maxlogit_iterations, cfg.tau, rng);
      acc.add(coverage_degree_mass(eq.action, game, cfg.n_sel));
      break;
    }
  }
  return acc;
}

// ---------------------------------------------------------------- tables

inline std::vector<std::string> cell_key(const Cell& c) {
  return {to_string(c.scheduler), format_double(c.density), format_double(c.p_sleep), format_double(c.fixed_range),
          std::to_string(c.lambda)};
}

inline const std::vector<std::string>& cell_header() {
  static const std::vector<std::string> h = {"scheduler", "density_per_m2", "p_sleep", "fixed_range_m", "lambda"};
  return h;
}

inline CsvTable runs_table(const std::vector<std::pair<Cell, std::vector<RunMetrics>>>& all) {
  CsvTable t;
  t.header = cell_header();
  for (const char* h : {"seed", "failed", "pm", "pm_track", "est_pairs", "sq_pos_m2", "sq_vel_m2ps2", "hps_per_target",
                        "energy_near_j", "energy_far_j", "lifetime_s"})
    t.header.push_back(h);
  for (const auto& [cell, runs] : all)
    for (const auto& r : runs) {
      auto row = cell_key(cell);
      row.push_back(std::to_string(r.seed));
      row.push_back(r.failed ? "1" : "0");
      for (double v : {r.pm, r.pm_track}) row.push_back(format_double(v));
      row.push_back(std::to_string(r.est_pairs));
      for (double v : {r.sq_pos, r.sq_vel, r.hps_per_target, r.energy_near, r.energy_far, r.lifetime})
        row.push_back(format_double(v));
      t.add_row(std::move(row));
    }
  return t;
}

inline CsvTable metric_table(const std::vector<CellSummary>& cells, const std::string& name,
                             const std::function<std::vector<double>(const CellSummary&)>& values,
                             const std::vector<std::string>& columns) {
  CsvTable t;
  t.header = cell_header();
  t.header.push_back("runs");
  t.header.push_back("failed");
  for (const auto& c : columns) t.header.push_back(c);
  for (const auto& s : cells) {
    auto row = cell_key(s.cell);
    row.push_back(std::to_string(s.runs));
    row.push_back(std::to_string(s.failed));
    for (double v : values(s)) row.push_back(format_double(v));
    if (row.size() != t.header.size()) throw std::logic_error("metric_table: column mismatch in " + name);
    t.add_row(std::move(row));
  }
  return t;
}

inline std::vector<std::pair<std::string, CsvTable>> summary_tables(const std::vector<CellSummary>& cells) {
  std::vector<std::pair<std::string, CsvTable>> out;
  out.emplace_back("pm.csv", metric_table(
                                 cells, "pm",
                                 [](const CellSummary& s) {
                                   return std::vector<double>{s.pm.mean(), s.pm.std_error(), s.pm_track.mean(),
                                                              s.pm_track.std_error()};
                                 },
                                 {"pm", "pm_se", "pm_track", "pm_track_se"}));
  out.emplace_back("rmse.csv", metric_table(
                                   cells, "rmse",
                                   [](const CellSummary& s) { return std::vector<double>{s.rmse_pos, s.rmse_vel}; },
                                   {"rmse_pos_m", "rmse_vel_mps"}));
  out.emplace_back("hps.csv", metric_table(
                                  cells, "hps",
                                  [](const CellSummary& s) {
                                    return std::vector<double>{s.hps.mean(), s.hps.std_error()};
                                  },
                                  {"hps_per_target", "hps_per_target_se"}));
  out.emplace_back("energy.csv", metric_table(
                                     cells, "energy",
                                     [](const CellSummary& s) {
                                       return std::vector<double>{s.energy_near.mean(), s.energy_near.std_error(),
                                                                  s.energy_far.mean(), s.energy_far.std_error()};
                                     },
                                     {"energy_near_j", "energy_near_se_j", "energy_far_j", "energy_far_se_j"}));
  out.emplace_back("lifetime.csv", metric_table(
                                       cells, "lifetime",
                                       [](const CellSummary& s) {
                                         return std::vector<double>{s.lifetime.mean(), s.lifetime.std_error(),
                                                                    s.lifetime_norm, s.lifetime_norm_se};
                                       },
                                       {"lifetime_s", "lifetime_se_s", "lifetime_norm", "lifetime_norm_se"}));
  return out;
}

inline CsvTable detection_table(const std::vector<std::pair<Cell, std::vector<Accumulator>>>& series, double dt) {
  CsvTable t;
  t.header = cell_header();
  for (const char* h : {"step", "time_s", "pdet", "pdet_se", "runs_in_roi"}) t.header.push_back(h);
  for (const auto& [cell, s] : series)
    for (std::size_t k = 0; k < s.size(); ++k) {
      auto row = cell_key(cell);
      row.push_back(std::to_string(k));
      row.push_back(format_double((k + 1) * dt));
      row.push_back(format_double(s[k].mean()));
      row.push_back(format_double(s[k].std_error()));
      row.push_back(std::to_string(s[k].n));
      t.add_row(std::move(row));
    }
  return t;
}

inline CsvTable egdop_table(const std::vector<EgdopRow>& rows) {
  CsvTable t;
  t.header = {"lower_bound_e0", "runs",  "e_savings_pct", "e_savings_se_pct", "e_eff_egdop", "e_eff_gdop",
              "kl_gdop_egdop",  "kl_gdop_me"};
  for (const auto& r : rows)
    t.add_row({format_double(r.bound), std::to_string(r.savings.n), format_double(r.savings.mean()),
               format_double(r.savings.std_error()), format_double(r.eff_egdop.mean()),
               format_double(r.eff_gdop.mean()), format_double(r.kl_egdop.mean()), format_double(r.kl_me.mean())});
  return t;
}

inline CsvTable game_table(const std::vector<GameValidationRow>& rows) {
  CsvTable t;
  t.header = {"n_sel_prime", "games", "chi_star", "chi_star_se", "phi_eff", "phi_eff_se", "t_game_s", "t_opt_s"};
  for (const auto& r : rows)
    t.add_row({std::to_string(r.n_prime), std::to_string(r.games), format_double(r.chi.mean()),
               format_double(r.chi.std_error()), format_double(r.phi_eff.mean()), format_double(r.phi_eff.std_error()),
               format_double(r.t_game.mean()), format_double(r.t_opt.mean())});
  return t;
}

inline json manifest(const ConfigDocument& doc, const std::string& command, const std::vector<std::string>& files) {
  const json cfg = to_json(doc);
  return json{{"command", command},
              {"config_hash", hex64(config_hash(cfg))},
              {"seed_base", doc.run.seed},
              {"runs", doc.run.runs},
              {"version", POSER_VERSION},
              {"files", files},
              {"config", cfg}};
}

inline std::string gnuplot_script(const std::string& command) {
  std::string s = "set datafile separator ','\nset key autotitle columnhead\nset grid\n";
  if (command == "gap") {
    s += "set xlabel 'time (s)'\nset ylabel 'P_det'\nset yrange [0:1.05]\n"
         "plot 'pdet.csv' using 7:8 with lines title 'P_det'\n";
  } else {
    s += "set xlabel 'density (nodes/m^2)'\nset ylabel 'P_m'\n"
         "plot 'pm.csv' using 2:8 with linespoints title 'P_m'\n";
  }
  return s;
}

}  // namespace poser
