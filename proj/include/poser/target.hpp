#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "poser/config.hpp"
#include "poser/rng.hpp"
#include "poser/types.hpp"

namespace poser {

using TargetState = Vec5;

namespace detail {

// s(w) = sin(wT)/w and c(w) = (1 - cos(wT))/w with their derivatives in w.
struct TurnTerms {
  double sn, cs, s, c, ds, dc;
};

inline TurnTerms turn_terms(double w, double T) {
  TurnTerms t{};
  const double wt = w * T;
  t.sn = std::sin(wt);
  t.cs = std::cos(wt);
  if (std::abs(wt) < 1e-4) {
    const double T2 = T * T, T3 = T2 * T, T4 = T3 * T;
    t.s = T - w * w * T3 / 6.0;
    t.c = w * T2 / 2.0 - w * w * w * T4 / 24.0;
    t.ds = -w * T3 / 3.0;
    t.dc = T2 / 2.0 - w * w * T4 / 8.0;
  } else {
    t.s = t.sn / w;
    t.c = (1.0 - t.cs) / w;
    t.ds = (T * t.cs * w - t.sn) / (w * w);
    t.dc = (T * t.sn * w - (1.0 - t.cs)) / (w * w);
  }
  return t;
}

}  // namespace detail

// Nearly coordinated turn, noise free.
inline Vec5 ct_transition(const Vec5& x, double dt) {
  const auto t = detail::turn_terms(x(kPsi), dt);
  Vec5 out;
  out(kX) = x(kX) + t.s * x(kVx) - t.c * x(kVy);
  out(kVx) = t.cs * x(kVx) - t.sn * x(kVy);
  out(kY) = x(kY) + t.c * x(kVx) + t.s * x(kVy);
  out(kVy) = t.sn * x(kVx) + t.cs * x(kVy);
  out(kPsi) = x(kPsi);
  return out;
}

inline Mat5 ct_jacobian(const Vec5& x, double dt) {
  const double w = x(kPsi);
  const auto t = detail::turn_terms(w, dt);
  const double vx = x(kVx), vy = x(kVy);
  Mat5 F = Mat5::Zero();
  F(kX, kX) = 1.0;
  F(kX, kVx) = t.s;
  F(kX, kVy) = -t.c;
  F(kX, kPsi) = t.ds * vx - t.dc * vy;
  F(kVx, kVx) = t.cs;
  F(kVx, kVy) = -t.sn;
  F(kVx, kPsi) = -dt * t.sn * vx - dt * t.cs * vy;
  F(kY, kVx) = t.c;
  F(kY, kY) = 1.0;
  F(kY, kVy) = t.s;
  F(kY, kPsi) = t.dc * vx + t.ds * vy;
  F(kVy, kVx) = t.sn;
  F(kVy, kVy) = t.cs;
  F(kVy, kPsi) = dt * t.cs * vx - dt * t.sn * vy;
  F(kPsi, kPsi) = 1.0;
  return F;
}

// Piecewise-constant acceleration gain [dt^2/2, dt] per axis, additive turn-rate noise.
inline Mat5 process_noise(const WorldConfig& cfg, double dt) {
  Mat5 Q = Mat5::Zero();
  const double a = dt * dt * dt * dt / 4.0, b = dt * dt * dt / 2.0, c = dt * dt;
  const double sx = cfg.sigma_vx * cfg.sigma_vx, sy = cfg.sigma_vy * cfg.sigma_vy;
  Q(kX, kX) = a * sx;
  Q(kX, kVx) = Q(kVx, kX) = b * sx;
  Q(kVx, kVx) = c * sx;
  Q(kY, kY) = a * sy;
  Q(kY, kVy) = Q(kVy, kY) = b * sy;
  Q(kVy, kVy) = c * sy;
  Q(kPsi, kPsi) = cfg.sigma_vpsi * cfg.sigma_vpsi;
  return Q;
}

inline TargetState propagate_target(const TargetState& s, double dt, const WorldConfig& cfg, RngStream& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("propagate_target: dt must be positive");
  Vec5 out = ct_transition(s, dt);
  const double ax = rng.normal(0.0, cfg.sigma_vx);
  const double ay = rng.normal(0.0, cfg.sigma_vy);
  const double ap = rng.normal(0.0, cfg.sigma_vpsi);
  out(kX) += 0.5 * dt * dt * ax;
  out(kVx) += dt * ax;
  out(kY) += 0.5 * dt * dt * ay;
  out(kVy) += dt * ay;
  out(kPsi) += ap;
  return out;
}

inline double lps_detection_probability(double d, const WorldConfig& cfg) {
  if (d < 0.0) throw std::invalid_argument("lps_detection_probability: negative distance");
  if (d < cfg.r_r) return cfg.alpha;
  if (d <= cfg.r_lps) return cfg.alpha * std::exp(-cfg.beta * (d - cfg.r_r));
  return 0.0;
}

enum class LpsCause { none, true_detection, false_alarm };

struct LpsReport {
  bool detected = false;
  LpsCause cause = LpsCause::none;
};

inline LpsReport sample_lps(Point2D node, const std::vector<Point2D>& targets, const WorldConfig& cfg, RngStream& rng) {
  for (const auto& t : targets) {
    if (rng.bernoulli(lps_detection_probability(distance(node, t), cfg))) return {true, LpsCause::true_detection};
  }
  if (rng.bernoulli(cfg.p_fa)) return {true, LpsCause::false_alarm};
  return {};
}

inline constexpr int kClutter = -1;

struct Measurement {
  double range = 0.0;
  double azimuth = 0.0;
  NodeId origin = 0;
  int truth = kClutter;  // target index, or kClutter; never read by estimators
};

inline Vec2 measure_h(const Vec5& x, Point2D node) {
  const double dx = x(kX) - node.x, dy = x(kY) - node.y;
  return {std::hypot(dx, dy), std::atan2(dy, dx)};
}

inline Mat25 measurement_jacobian(const Vec5& x, Point2D node) {
  const double dx = x(kX) - node.x, dy = x(kY) - node.y;
  const double r2 = dx * dx + dy * dy;
  if (!(r2 > 0.0)) throw std::domain_error("measurement_jacobian: target coincides with node");
  const double r = std::sqrt(r2);
  Mat25 H = Mat25::Zero();
  H(0, kX) = dx / r;
  H(0, kY) = dy / r;
  H(1, kX) = -dy / r2;
  H(1, kY) = dx / r2;
  return H;
}

inline std::vector<Measurement> hps_measure(NodeId id, Point2D node, double range, const std::vector<Point2D>& targets,
                                            const WorldConfig& cfg, RngStream& rng) {
  std::vector<Measurement> out;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double dx = targets[i].x - node.x, dy = targets[i].y - node.y;
    const double d = std::hypot(dx, dy);
    if (d > range) continue;
    if (!rng.bernoulli(cfg.p_d)) continue;
    Measurement m;
    m.range = std::max(0.0, d + rng.normal(0.0, cfg.sigma_r));
    m.azimuth = wrap_angle(std::atan2(dy, dx) + rng.normal(0.0, cfg.sigma_phi));
    m.origin = id;
    m.truth = static_cast<int>(i);
    out.push_back(m);
  }
  const int n_cl = rng.poisson(cfg.mu_cl);
  for (int j = 0; j < n_cl; ++j) {
    const double rho = range * std::sqrt(rng.uniform());
    const double th = rng.uniform(-kPi, kPi);
    Measurement m;
    m.range = rho;
    m.azimuth = wrap_angle(th);
    m.origin = id;
    m.truth = kClutter;
    out.push_back(m);
  }
  return out;
}

}  // namespace poser
