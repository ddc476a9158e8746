#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "poser/config.hpp"
#include "poser/rng.hpp"
#include "poser/types.hpp"

namespace poser {

inline constexpr double kMinCellExtent = 0.1;

struct Grid {
  double x0 = 0.0, y0 = 0.0, dx = 0.0, dy = 0.0;
  int u = 1, v = 1;

  std::size_t cells() const { return static_cast<std::size_t>(u) * static_cast<std::size_t>(v); }
  std::size_t index(int g, int h) const { return static_cast<std::size_t>(g) * v + h; }
  Point2D center(int g, int h) const { return {x0 + (g + 0.5) * dx, y0 + (h + 0.5) * dy}; }
  Point2D center(std::size_t i) const { return center(static_cast<int>(i / v), static_cast<int>(i % v)); }
};

inline Grid partition_uncertainty(Point2D mean, const Mat2& cov, int U, int V) {
  if (U < 1 || V < 1) throw std::invalid_argument("partition_uncertainty: need U, V >= 1");
  Grid g;
  g.u = U;
  g.v = V;
  g.dx = std::max(6.0 * std::sqrt(std::max(0.0, cov(0, 0))) / U, kMinCellExtent);
  g.dy = std::max(6.0 * std::sqrt(std::max(0.0, cov(1, 1))) / V, kMinCellExtent);
  g.x0 = mean.x - 0.5 * g.dx * U;
  g.y0 = mean.y - 0.5 * g.dy * V;
  return g;
}

namespace detail {
inline constexpr std::array<double, 5> kGl5X = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                                0.9061798459386640};
inline constexpr std::array<double, 5> kGl5W = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                0.4786286704993665, 0.2369268850561891};
}  // namespace detail

// Gaussian mass per cell by 5x5 Gauss-Legendre quadrature, normalized to sum 1.
inline std::vector<double> cell_worth(const Grid& grid, Point2D mean, const Mat2& cov) {
  Mat2 c = cov;
  const double floor = 1e-12;
  if (c.determinant() <= floor * floor) c += Mat2::Identity() * floor;
  const Mat2 inv = c.inverse();
  const double norm = 1.0 / (2.0 * kPi * std::sqrt(c.determinant()));
  std::vector<double> w(grid.cells(), 0.0);
  double total = 0.0;
  for (int g = 0; g < grid.u; ++g)
    for (int h = 0; h < grid.v; ++h) {
      const double cx = grid.x0 + (g + 0.5) * grid.dx, cy = grid.y0 + (h + 0.5) * grid.dy;
      double s = 0.0;
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
          const double x = cx + 0.5 * grid.dx * detail::kGl5X[i] - mean.x;
          const double y = cy + 0.5 * grid.dy * detail::kGl5X[j] - mean.y;
          const double q = inv(0, 0) * x * x + 2.0 * inv(0, 1) * x * y + inv(1, 1) * y * y;
          s += detail::kGl5W[i] * detail::kGl5W[j] * norm * std::exp(-0.5 * q);
        }
      s *= 0.25 * grid.dx * grid.dy;
      w[grid.index(g, h)] = s;
      total += s;
    }
  if (total > 0.0 && std::isfinite(total)) {
    for (double& x : w) x /= total;
    return w;
  }
  // All mass underflowed: split evenly over the cells nearest the mean.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i) best = std::min(best, distance(grid.center(i), mean));
  int n = 0;
  for (std::size_t i = 0; i < w.size(); ++i) n += distance(grid.center(i), mean) <= best + 1e-12;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = distance(grid.center(i), mean) <= best + 1e-12 ? 1.0 / n : 0.0;
  return w;
}

inline double coverage_function(int J, double db1, double db2, int n_sel) {
  if (J <= n_sel) return db1 * J;
  return db1 * n_sel - db2 * (J - n_sel);
}

inline double energy_cost(double action, const WorldConfig& cfg) {
  if (action != 0.0) return cfg.w_hps * action * cfg.dt;
  return cfg.e_lps * cfg.dt;
}

using JointAction = std::vector<int>;  // index into GameInstance::actions per player

struct GameInstance {
  std::vector<NodeId> ids;
  std::vector<Point2D> pos;
  std::vector<double> actions;  // actions[0] == 0
  Grid grid;
  std::vector<double> worth;
  double db1 = 0.5, db2 = 0.5;
  int n_sel = 3;
  std::vector<double> cost;  // energy cost per action
  double norm = 1.0;         // N' * E_c(R_L)
  // cover[(p * n_actions + a) * cells + cell]
  std::vector<std::uint8_t> cover;

  std::size_t players() const { return ids.size(); }
  std::size_t n_actions() const { return actions.size(); }
  bool covers(std::size_t p, int a, std::size_t cell) const {
    return cover[(p * n_actions() + static_cast<std::size_t>(a)) * grid.cells() + cell] != 0;
  }
  double B(int J) const { return coverage_function(J, db1, db2, n_sel); }
};

inline GameInstance make_game(const std::vector<NodeId>& ids, const std::vector<Point2D>& pos, const Grid& grid,
                              std::vector<double> worth, const WorldConfig& cfg) {
  if (ids.size() != pos.size()) throw std::invalid_argument("make_game: ids/pos size mismatch");
  GameInstance g;
  g.ids = ids;
  g.pos = pos;
  g.actions.push_back(0.0);
  for (double r : cfg.hps_ranges) g.actions.push_back(r);
  g.grid = grid;
  g.worth = std::move(worth);
  g.db1 = cfg.db1;
  g.db2 = cfg.db2;
  g.n_sel = cfg.n_sel;
  for (double a : g.actions) g.cost.push_back(energy_cost(a, cfg));
  g.norm = static_cast<double>(cfg.n_sel_prime) * energy_cost(cfg.rl(), cfg);
  const std::size_t nc = grid.cells();
  g.cover.assign(ids.size() * g.actions.size() * nc, 0);
  for (std::size_t p = 0; p < ids.size(); ++p)
    for (std::size_t a = 1; a < g.actions.size(); ++a)
      for (std::size_t c = 0; c < nc; ++c)
        g.cover[(p * g.actions.size() + a) * nc + c] = distance(grid.center(c), pos[p]) <= g.actions[a] ? 1 : 0;
  return g;
}

inline GameInstance make_game(const std::vector<NodeId>& ids, const std::vector<Point2D>& pos, Point2D mean,
                              const Mat2& cov, const WorldConfig& cfg) {
  const Grid grid = partition_uncertainty(mean, cov, cfg.grid_u, cfg.grid_v);
  return make_game(ids, pos, grid, cell_worth(grid, mean, cov), cfg);
}

inline std::vector<int> coverage_count(const JointAction& a, const GameInstance& g) {
  std::vector<int> J(g.grid.cells(), 0);
  for (std::size_t p = 0; p < g.players(); ++p) {
    if (a[p] == 0) continue;
    for (std::size_t c = 0; c < J.size(); ++c) J[c] += g.covers(p, a[p], c);
  }
  return J;
}

inline double potential(const JointAction& a, const GameInstance& g) {
  const auto J = coverage_count(a, g);
  double cov = 0.0;
  for (std::size_t c = 0; c < J.size(); ++c) cov += g.worth[c] * g.B(J[c]);
  double e = 0.0;
  for (std::size_t p = 0; p < g.players(); ++p) e += g.cost[a[p]];
  return cov - e / g.norm;
}

// Marginal contribution against the null action, expanded cell by cell.
inline double utility(std::size_t i, const JointAction& a, const GameInstance& g) {
  JointAction null = a;
  null[i] = 0;
  const auto Jnull = coverage_count(null, g);
  double u = 0.0;
  if (a[i] != 0)
    for (std::size_t c = 0; c < Jnull.size(); ++c) {
      if (!g.covers(i, a[i], c)) continue;
      u += g.worth[c] * (g.B(Jnull[c] + 1) - g.B(Jnull[c]));
    }
  return u - (g.cost[a[i]] - g.cost[0]) / g.norm;
}

// Coverage counts cached so a single player's change costs O(U*V).
class PotentialState {
 public:
  PotentialState(const GameInstance& g, JointAction a) : g_(&g), a_(std::move(a)) {
    J_ = coverage_count(a_, g);
    for (std::size_t c = 0; c < J_.size(); ++c) cover_ += g.worth[c] * g.B(J_[c]);
    for (std::size_t p = 0; p < g.players(); ++p) energy_ += g.cost[a_[p]];
  }

  double phi() const { return cover_ - energy_ / g_->norm; }
  const JointAction& action() const { return a_; }

  double delta(std::size_t p, int na) const {
    const int oa = a_[p];
    if (na == oa) return 0.0;
    double d = 0.0;
    for (std::size_t c = 0; c < J_.size(); ++c) {
      const int diff = (na != 0 && g_->covers(p, na, c)) - (oa != 0 && g_->covers(p, oa, c));
      if (diff == 0) continue;
      d += g_->worth[c] * (g_->B(J_[c] + diff) - g_->B(J_[c]));
    }
    return d - (g_->cost[na] - g_->cost[oa]) / g_->norm;
  }

  // U_p(x, a_-p) relative to the null action.
  double utility_of(std::size_t p, int x) const { return delta(p, x) - delta(p, 0); }

  void set(std::size_t p, int na) {
    const int oa = a_[p];
    if (na == oa) return;
    for (std::size_t c = 0; c < J_.size(); ++c) {
      const int diff = (na != 0 && g_->covers(p, na, c)) - (oa != 0 && g_->covers(p, oa, c));
      if (diff == 0) continue;
      cover_ += g_->worth[c] * (g_->B(J_[c] + diff) - g_->B(J_[c]));
      J_[c] += diff;
    }
    energy_ += g_->cost[na] - g_->cost[oa];
    a_[p] = na;
  }

 private:
  const GameInstance* g_;
  JointAction a_;
  std::vector<int> J_;
  double cover_ = 0.0;
  double energy_ = 0.0;
};

struct MaxlogitResult {
  JointAction action;
  double phi = 0.0;
};

inline MaxlogitResult maxlogit_solve(const GameInstance& g, int iterations, double tau, RngStream& rng) {
  if (iterations < 1 || !(tau > 0.0)) throw std::invalid_argument("maxlogit_solve: need iterations >= 1, tau > 0");
  PotentialState st(g, JointAction(g.players(), 0));
  MaxlogitResult best{st.action(), potential(st.action(), g)};
  if (g.players() == 0) return best;
  for (int it = 0; it < iterations; ++it) {
    const std::size_t j = rng.index(g.players());
    const int cand = static_cast<int>(rng.index(g.n_actions()));
    const double u_new = st.utility_of(j, cand);
    const double u_cur = st.utility_of(j, st.action()[j]);
    // psi(new) / max(psi(cur), psi(new)) without overflow.
    const double mu = std::exp(std::min(0.0, (u_new - u_cur) / tau));
    if (rng.uniform() < mu) {
      st.set(j, cand);
      if (st.phi() > best.phi) best = {st.action(), st.phi()};
    }
  }
  best.phi = potential(best.action, g);
  return best;
}

inline constexpr double kExhaustiveGuard = 1e7;

inline MaxlogitResult exhaustive_optimum(const GameInstance& g) {
  const double space = std::pow(static_cast<double>(g.n_actions()), static_cast<double>(g.players()));
  if (space > kExhaustiveGuard) throw std::length_error("exhaustive_optimum: search space exceeds guard");
  const std::size_t n = g.players();
  PotentialState st(g, JointAction(n, 0));
  MaxlogitResult best{st.action(), potential(st.action(), g)};
  if (n == 0) return best;
  JointAction a(n, 0);
  const int na = static_cast<int>(g.n_actions());
  while (true) {
    std::size_t i = n;
    while (i > 0 && a[i - 1] == na - 1) --i;
    if (i == 0) break;
    ++a[i - 1];
    for (std::size_t j = i; j < n; ++j) a[j] = 0;
    for (std::size_t j = i - 1; j < n; ++j) st.set(j, a[j]);
    if (st.phi() > best.phi - 1e-9) {
      const double exact = potential(a, g);
      if (exact > best.phi) best = {a, exact};
    }
  }
  return best;
}

// Worth fraction covered by exactly n players.
inline double coverage_degree_mass(const JointAction& a, const GameInstance& g, int n) {
  const auto J = coverage_count(a, g);
  double s = 0.0;
  for (std::size_t c = 0; c < J.size(); ++c)
    if (J[c] == n) s += g.worth[c];
  return s;
}

inline std::size_t select_leader(const std::vector<NodeId>& ids, const std::vector<double>& energies) {
  if (ids.empty()) throw std::invalid_argument("select_leader: no players");
  std::size_t best = 0;
  for (std::size_t i = 1; i < ids.size(); ++i)
    if (energies[i] > energies[best] || (energies[i] == energies[best] && ids[i] < ids[best])) best = i;
  return best;
}

}  // namespace poser
