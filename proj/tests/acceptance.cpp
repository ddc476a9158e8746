// Acceptance checks. One PASS/FAIL line per criterion; exit status is the failure count.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "poser/fusion.hpp"
#include "poser/game.hpp"
#include "poser/harness.hpp"
#include "poser/pfsa.hpp"
#include "poser/target.hpp"
#include "poser/tracking.hpp"

using namespace poser;

namespace {

// Tolerances.
constexpr double kIdentityTol = 1e-12;
constexpr double kIdentitySeconds = 5.0;
constexpr double kChiMin = 0.98;
constexpr double kPhiEffMin = 0.95;
constexpr double kSpeedupMin = 10.0;
constexpr double kGameSeconds = 600.0;
constexpr double kCoverageSlack = 0.02;
constexpr double kSavingsAtFull = 0.1;  // percent
constexpr double kKlRatio = 3.0;
constexpr double kGapPdetMin = 0.8;
constexpr double kGapSeconds = 900.0;
constexpr double kHpsLow = 2.5, kHpsHigh = 4.0;
constexpr double kEkfTol = 1e-9;
constexpr double kJacobianTol = 1e-6;
constexpr double kRowTol = 1e-12;

int failures = 0;

void report(int id, bool pass, const std::string& what) {
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << what << std::endl;
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
void guarded(int id, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

// ---------------------------------------------------------------- 1

GameInstance random_game(RngStream& r, int players, const WorldConfig& c) {
  const Point2D mean{r.uniform(-5, 5), r.uniform(-5, 5)};
  const double sx = r.uniform(0.5, 6), sy = r.uniform(0.5, 6), rho = r.uniform(-0.6, 0.6);
  Mat2 cov;
  cov << sx * sx, rho * sx * sy, rho * sx * sy, sy * sy;
  std::vector<NodeId> ids;
  std::vector<Point2D> pos;
  for (int p = 0; p < players; ++p) {
    ids.push_back(static_cast<NodeId>(p));
    const double a = r.uniform(0, 2 * kPi), d = r.uniform(0, 1.2 * c.rl());
    pos.push_back({mean.x + d * std::cos(a), mean.y + d * std::sin(a)});
  }
  return make_game(ids, pos, mean, cov, c);
}

void potential_identity() {
  const WorldConfig c;
  RngStream r(1001);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto g = random_game(r, 2 + static_cast<int>(r.index(5)), c);
    JointAction a1(g.players());
    for (auto& x : a1) x = static_cast<int>(r.index(g.n_actions()));
    const std::size_t i = r.index(g.players());
    auto a2 = a1;
    a2[i] = static_cast<int>(r.index(g.n_actions()));
    worst = std::max(worst, std::abs((utility(i, a1, g) - utility(i, a2, g)) - (potential(a1, g) - potential(a2, g))));
  }
  const double t = seconds(t0);
  report(1, worst <= kIdentityTol && t < kIdentitySeconds,
         "max |dU - dPhi| = " + fmt(worst) + " over 1000 deviations, " + fmt(t) + " s");
}

// ---------------------------------------------------------------- 2

void game_check() {
  const WorldConfig c;
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::ostringstream os;
  for (int n : {3, 4, 5}) {
    GameValidationOptions o;
    const auto row = game_validation(c, n, o);
    const double speed = row.t_opt.mean() / row.t_game.mean();
    ok = ok && row.games == o.games && row.chi.mean() >= kChiMin && row.phi_eff.mean() >= kPhiEffMin;
    if (n == 5) ok = ok && speed >= kSpeedupMin;
    os << "N'=" << n << " games=" << row.games << " chi=" << fmt(row.chi.mean()) << " phi_eff=" << fmt(row.phi_eff.mean())
       << " t_game=" << fmt(row.t_game.mean()) << "s t_opt=" << fmt(row.t_opt.mean()) << "s; ";
  }
  const double t = seconds(t0);
  os << fmt(t) << " s";
  report(2, ok && t < kGameSeconds, os.str());
}

// ---------------------------------------------------------------- 3

void equilibrium_check() {
  WorldConfig c;
  c.delta_r = 5.0;
  c.hps_ranges = make_ranges(30.0, 5.0, 60.0);
  c.delta = 0.035;
  c.db1 = 0.5;
  c.n_sel_prime = 5;
  const auto v = config_violations(c);
  EquilibriumCoverageOptions o;
  const auto acc = equilibrium_coverage(c, o);
  const double need = 1.0 - c.delta - kCoverageSlack;
  report(3, v.empty() && acc.n >= 200 && acc.mean() >= need,
         "mass covered by exactly N_sel = " + fmt(acc.mean()) + " (need " + fmt(need) + ") over " +
             std::to_string(acc.n) + " instances");
}

// ---------------------------------------------------------------- 4

void egdop_check() {
  const WorldConfig c;
  EgdopOptions o;
  const auto rows = egdop_comparison(c, o);
  bool decreasing = true, eff = true, kl = true;
  std::ostringstream os;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i > 0 && !(r.savings.mean() < rows[i - 1].savings.mean())) decreasing = false;
    if (r.eff_egdop.mean() < r.eff_gdop.mean()) eff = false;
    const double ke = r.kl_egdop.mean(), km = r.kl_me.mean();
    if (!(ke < km && km >= kKlRatio * ke)) kl = false;
    os << "[" << r.bound << "] save=" << fmt(r.savings.mean()) << "% eff=" << fmt(r.eff_egdop.mean()) << "/"
       << fmt(r.eff_gdop.mean()) << " kl=" << fmt(ke) << "/" << fmt(km) << "; ";
  }
  const bool full = !rows.empty() && rows.back().bound == 1.0 && std::abs(rows.back().savings.mean()) <= kSavingsAtFull;
  report(4, decreasing && eff && kl && full,
         std::string(decreasing ? "" : "savings not decreasing; ") + (full ? "" : "savings at [1,1] too large; ") +
             (eff ? "" : "E_eff order broken; ") + (kl ? "" : "KL order broken; ") + os.str());
}

// ---------------------------------------------------------------- 5

void gap_check() {
  const auto t0 = std::chrono::steady_clock::now();
  WorldConfig c;
  c.density = 1.4e-3;
  RunSpec spec;
  spec.runs = 50;
  spec.gap_radius = 50.0;
  spec.lane_y = c.region_height / 2.0;
  const double half = spec.gap_radius / spec.target_speed;
  // pdet[k] belongs to time (k + 1) dt.
  const int k0 = static_cast<int>(std::lround((spec.gap_time - half) / c.dt)) - 1;
  const int k1 = static_cast<int>(std::lround((spec.gap_time + half) / c.dt)) - 1;
  bool ok = true;
  std::ostringstream os;
  for (auto s : {Scheduler::poser, Scheduler::ans, Scheduler::lpshps, Scheduler::random}) {
    const Cell cell{s, c.density, c.p_sleep, c.r1(), 1};
    const auto cfg = cell_config(c, cell, spec);
    const auto runs = monte_carlo(cfg, cell_scenario(cfg, cell, spec), spec.runs, spec.seed, 1);
    const auto series = detection_series(runs);
    if (s == Scheduler::poser) {
      Accumulator w;
      for (int k = k0; k <= k1 && k < static_cast<int>(series.size()); ++k) w.add(series[k].mean());
      ok = ok && w.mean() >= kGapPdetMin;
      os << "poser window pdet=" << fmt(w.mean()) << "; ";
    } else {
      int run = 0, best = 0;
      for (int k = k0; k <= k1 && k < static_cast<int>(series.size()); ++k) {
        run = series[k].n > 0 && series[k].mean() == 0.0 ? run + 1 : 0;
        best = std::max(best, run);
      }
      ok = ok && best >= 1;
      os << to_string(s) << " zero steps=" << best << "; ";
    }
  }
  const double t = seconds(t0);
  os << fmt(t) << " s";
  report(5, ok && t < kGapSeconds, os.str());
}

// ---------------------------------------------------------------- 6 and 7

void sweep_checks() {
  const WorldConfig base;
  RunSpec spec;
  spec.runs = 50;
  const std::vector<double> densities = {0.6e-3, 0.8e-3, 1.0e-3, 1.2e-3, 1.4e-3};
  bool order = true, hps_ok = true;
  std::ostringstream pm_os, hps_os;
  for (double d : densities) {
    std::map<Scheduler, CellSummary> by;
    for (auto s : {Scheduler::poser, Scheduler::ans, Scheduler::lpshps, Scheduler::random}) {
      const Cell cell{s, d, base.p_sleep, base.r1(), 1};
      const auto cfg = cell_config(base, cell, spec);
      by[s] = aggregate(cell, monte_carlo(cfg, cell_scenario(cfg, cell, spec), spec.runs, spec.seed, 1));
    }
    const double p = by[Scheduler::poser].pm.mean();
    pm_os << "rho=" << d << " pm poser/ans/lpshps/random=" << fmt(p);
    for (auto s : {Scheduler::ans, Scheduler::lpshps, Scheduler::random}) {
      pm_os << "/" << fmt(by[s].pm.mean());
      if (!(p <= by[s].pm.mean())) order = false;
    }
    pm_os << "; ";
    if (d >= 0.8e-3) {
      const double h = by[Scheduler::poser].hps.mean();
      if (!(h >= kHpsLow && h <= kHpsHigh)) hps_ok = false;
      hps_os << "rho=" << d << " hps=" << fmt(h) << "; ";
    }
  }
  report(6, hps_ok, hps_os.str());

  // Lifetime in the tube, e0 scaled down so nodes die within the horizon.
  WorldConfig lw = base;
  lw.e0 = 500.0;
  RunSpec ls;
  ls.runs = 20;
  ls.tube = true;
  auto lifetime_of = [&](Scheduler s, double p_sleep, int lambda, double p_rand) {
    WorldConfig w = lw;
    w.p_rand = p_rand;
    const Cell cell{s, w.density, p_sleep, w.r1(), lambda};
    const auto cfg = cell_config(w, cell, ls);
    return aggregate(cell, monte_carlo(cfg, cell_scenario(cfg, cell, ls), ls.runs, ls.seed, 1)).lifetime.mean();
  };
  const double ref = lifetime_of(Scheduler::poser, 0.75, 0, lw.p_rand);
  bool life = ref > 0.0;
  std::ostringstream lo;
  for (int lambda : {0, 1, 2}) {
    const double a = lifetime_of(Scheduler::poser, lw.p_sleep, lambda, lw.p_rand) / ref;
    const double b = lifetime_of(Scheduler::lpshps, lw.p_sleep, lambda, lw.p_rand) / ref;
    const double r = lifetime_of(Scheduler::random, lw.p_sleep, lambda, 0.0) / ref;
    if (!(a >= b && b >= r)) life = false;
    lo << "lambda=" << lambda << " life poser/lpshps/random=" << fmt(a) << "/" << fmt(b) << "/" << fmt(r) << "; ";
  }
  report(7, order && life,
         std::string(order ? "" : "P_m order broken; ") + (life ? "" : "lifetime order broken; ") + pm_os.str() + lo.str());
}

// ---------------------------------------------------------------- 8

Track random_track(RngStream& r, double x, double y) {
  Track t;
  t.mean << x, r.uniform(-3, 3), y, r.uniform(-3, 3), r.uniform(-0.1, 0.1);
  t.cov = Mat5::Identity() * 0.5;
  const double v = r.uniform(0.05, 3);
  t.cov(kX, kX) = t.cov(kY, kY) = v;
  t.cov(kX, kY) = t.cov(kY, kX) = 0.3 * v;
  t.status = TrackStatus::confirmed;
  return t;
}

Mat5 random_spd(RngStream& r) {
  Mat5 A;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) A(i, j) = r.normal(0, 1);
  Mat5 S = A * A.transpose() + 0.05 * Mat5::Identity();
  symmetrize(S);
  return S;
}

void estimator_check() {
  RngStream r(8001);
  std::ostringstream os;
  // EKF equivalence.
  double ekf_err = 0.0;
  {
    WorldConfig c;
    c.p_d = 1.0;
    c.mu_cl = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
      const Point2D node{r.uniform(-5, 5), r.uniform(-5, 5)};
      std::vector<Track> tr{random_track(r, r.uniform(10, 30), r.uniform(10, 30))};
      Vec5 x = tr[0].mean;
      Mat5 P = tr[0].cov;
      const auto z = measure_h(x, node);
      Measurement m;
      m.range = z(0) + r.normal(0, 0.1);
      m.azimuth = z(1) + r.normal(0, 0.005);
      m.truth = 0;
      jpda_update(tr, {m}, node, 60, c);
      const Mat25 H = measurement_jacobian(x, node);
      const Mat2 S = H * P * H.transpose() + measurement_noise(c);
      const Mat52 K = P * H.transpose() * S.inverse();
      Vec2 nu = Vec2(m.range, m.azimuth) - measure_h(x, node);
      nu(1) = wrap_angle(nu(1));
      x += K * nu;
      P = (Mat5::Identity() - K * H) * P;
      ekf_err = std::max({ekf_err, (tr[0].mean - x).cwiseAbs().maxCoeff(), (tr[0].cov - P).cwiseAbs().maxCoeff()});
    }
  }
  // Jacobians.
  double jac = 0.0;
  const double h = 1e-5;
  for (int rep = 0; rep < 200; ++rep) {
    Vec5 s;
    s << r.uniform(-100, 100), r.uniform(-10, 10), r.uniform(-100, 100), r.uniform(-10, 10), r.uniform(-0.5, 0.5);
    if (rep % 10 == 0) s(kPsi) = 0.0;
    const Point2D node{r.uniform(-100, 100), r.uniform(-100, 100)};
    Mat5 NF;
    Mat25 NH;
    for (int j = 0; j < 5; ++j) {
      Vec5 p = s, m = s;
      p(j) += h;
      m(j) -= h;
      NF.col(j) = (ct_transition(p, 0.5) - ct_transition(m, 0.5)) / (2 * h);
      Vec2 d = measure_h(p, node) - measure_h(m, node);
      d(1) = wrap_angle(d(1));
      NH.col(j) = d / (2 * h);
    }
    jac = std::max(jac, (ct_jacobian(s, 0.5) - NF).norm() / std::max(1.0, NF.norm()));
    if (distance(node, position_of(s)) > 1.0)
      jac = std::max(jac, (measurement_jacobian(s, node) - NH).norm() / std::max(1.0, NH.norm()));
  }
  // Association rows.
  double beta = 0.0;
  {
    WorldConfig c;
    c.mu_cl = 1.0;
    for (int rep = 0; rep < 1000; ++rep) {
      const Point2D node{r.uniform(-5, 5), r.uniform(-5, 5)};
      std::vector<Track> tr;
      const int nt = 1 + static_cast<int>(r.index(3));
      for (int t = 0; t < nt; ++t) tr.push_back(random_track(r, r.uniform(10, 25), r.uniform(10, 25)));
      std::vector<Measurement> ms;
      const int nm = static_cast<int>(r.index(5));
      for (int j = 0; j < nm; ++j) {
        const auto z = measure_h(tr[r.index(nt)].mean, node);
        Measurement m;
        m.range = z(0) + r.normal(0, 1);
        m.azimuth = z(1) + r.normal(0, 0.05);
        ms.push_back(m);
      }
      for (const auto& row : jpda_update(tr, ms, node, 40, c).beta) {
        double sum = 0.0;
        for (double b : row) sum += b;
        beta = std::max(beta, std::abs(sum - 1.0));
      }
    }
  }
  // Fusion trace.
  int fusion_bad = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 2 + static_cast<int>(r.index(4));
    std::vector<Gaussian5> g;
    double best = 1e300;
    for (int i = 0; i < n; ++i) {
      Vec5 m;
      for (int k = 0; k < 5; ++k) m(k) = r.normal(0, 1);
      g.push_back({m, random_spd(r)});
      best = std::min(best, g.back().cov.trace());
    }
    if (t2tf_fuse(g).cov.trace() > best * (1 + 1e-12)) ++fusion_bad;
  }
  os << "ekf diff=" << fmt(ekf_err) << " jacobian rel=" << fmt(jac) << " beta row err=" << fmt(beta)
     << " fusion violations=" << fusion_bad << "/1000";
  report(8, ekf_err <= kEkfTol && jac <= kJacobianTol && beta <= kRowTol && fusion_bad == 0, os.str());
}

// ---------------------------------------------------------------- 9

std::string scenario_csv(Scheduler s, bool gap) {
  WorldConfig c;
  RunSpec spec;
  spec.runs = 3;
  spec.steps = 120;
  spec.seed = 77;
  if (gap) spec.gap_radius = 50.0;
  const Cell cell{s, c.density, c.p_sleep, c.r1(), 2};
  const auto cfg = cell_config(c, cell, spec);
  auto runs = monte_carlo(cfg, cell_scenario(cfg, cell, spec), spec.runs, spec.seed, 1);
  std::string out = to_csv(runs_table({{cell, runs}}));
  for (const auto& [name, t] : summary_tables({aggregate(cell, runs)})) out += name + "\n" + to_csv(t);
  out += to_csv(detection_table({{cell, detection_series(runs)}}, c.dt));
  return out;
}

void determinism_check() {
  bool ok = true;
  std::size_t bytes = 0;
  for (auto s : {Scheduler::poser, Scheduler::ans, Scheduler::lpshps, Scheduler::random})
    for (bool gap : {false, true}) {
      const auto a = scenario_csv(s, gap), b = scenario_csv(s, gap);
      ok = ok && a == b;
      bytes += a.size();
    }
  report(9, ok, "8 scenarios rerun, " + std::to_string(bytes) + " CSV bytes compared");
}

// ---------------------------------------------------------------- 10

void pfsa_fuzz() {
  WorldConfig c;
  RngStream r(10001);
  double worst = 0.0;
  double sleep_hps = 0.0;
  bool negative = false;
  for (int i = 0; i < 100000; ++i) {
    c.p_sleep = r.uniform();
    TransitionContext x;
    x.current = static_cast<NodeMode>(r.index(3));
    x.has_info = r.bernoulli(0.5);
    x.dnc_valid = x.has_info;
    x.p_own = r.uniform();
    x.p_hat = r.uniform() * c.p_d;
    x.selected = x.has_info && r.bernoulli(0.3);
    x.selected_range = c.hps_ranges[r.index(c.hps_ranges.size())];
    x.near = r.bernoulli(0.5);
    x.db = static_cast<int>(r.index(6));
    const auto d = transition_row(x, c);
    worst = std::max(worst, std::abs(d.row.sum() - 1.0));
    negative = negative || d.row.p_to_sleep < 0.0 || d.row.p_to_lps < 0.0 || d.row.p_to_hps < 0.0;
    if (x.current == NodeMode::sleep) sleep_hps = std::max(sleep_hps, std::abs(d.row.p_to_hps));
  }
  report(10, worst <= kRowTol && sleep_hps == 0.0 && !negative,
         "max |row sum - 1| = " + fmt(worst) + ", max Sleep->HPS = " + fmt(sleep_hps));
}

void sweep_guarded() {
  try {
    sweep_checks();
  } catch (const std::exception& e) {
    report(6, false, std::string("exception: ") + e.what());
    report(7, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

// Optional arguments select criteria by number; 6 and 7 share one sweep.
int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<void()>>> all = {
      {1, [] { guarded(1, potential_identity); }}, {2, [] { guarded(2, game_check); }},
      {3, [] { guarded(3, equilibrium_check); }},  {4, [] { guarded(4, egdop_check); }},
      {5, [] { guarded(5, gap_check); }},          {6, sweep_guarded},
      {8, [] { guarded(8, estimator_check); }},    {9, [] { guarded(9, determinism_check); }},
      {10, [] { guarded(10, pfsa_fuzz); }}};
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  for (const auto& [id, run] : all)
    if (only.empty() || std::find(only.begin(), only.end(), id) != only.end() ||
        (id == 6 && std::find(only.begin(), only.end(), 7) != only.end()))
      run();
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures;
}
