#pragma once

#include <array>
#include <cmath>
#include <algorithm>
#include <optional>
#include <string>
#include <stdexcept>
#include <vector>

#include "poser/config.hpp"
#include "poser/rng.hpp"
#include "poser/selection.hpp"
#include "poser/types.hpp"

namespace poser {

struct TransitionRow {
  double p_to_sleep = 0.0;
  double p_to_lps = 0.0;
  double p_to_hps = 0.0;

  double sum() const { return p_to_sleep + p_to_lps + p_to_hps; }
};

// Which line of the switching table produced a row.
enum class Branch {
  sleep,
  lps_no_info,
  hps_no_info,
  selected,
  near_unselected,
  far_covered,
  far_uncovered,
};

struct TransitionContext {
  NodeMode current = NodeMode::lps;
  bool has_info = false;  // received neighbor broadcasts this step
  double p_own = 0.0;     // P_LPS in LPS, P_HPS in HPS
  bool dnc_valid = false;
  bool selected = false;
  double selected_range = 0.0;
  bool near = false;  // within R_1 of some prediction
  int db = 0;
  double p_hat = 0.0;
};

struct TransitionDecision {
  TransitionRow row;
  Branch branch = Branch::sleep;
  std::optional<double> staged_range;
};

namespace detail {
inline void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string("transition_row: probability out of range: ") + what);
}
}  // namespace detail

inline TransitionDecision transition_row(const TransitionContext& c, const WorldConfig& cfg) {
  TransitionDecision d;
  if (c.current == NodeMode::sleep) {
    d.branch = Branch::sleep;
    d.row = {cfg.p_sleep, 1.0 - cfg.p_sleep, 0.0};
    return d;
  }
  if (!c.has_info) {
    if (c.selected) throw std::invalid_argument("transition_row: selected without received information");
    detail::check_probability(c.p_own, "own");
    if (c.current == NodeMode::lps) {
      d.branch = Branch::lps_no_info;
      d.row = {1.0 - c.p_own, 0.0, c.p_own};
    } else {
      d.branch = Branch::hps_no_info;
      d.row = {0.0, 1.0 - c.p_own, c.p_own};
    }
    return d;
  }
  if (!c.dnc_valid) throw std::invalid_argument("transition_row: information received without collaboration output");
  detail::check_probability(c.p_hat, "predicted");
  const double p = c.p_hat;
  if (c.selected) {
    if (!(c.selected_range > 0.0)) throw std::invalid_argument("transition_row: selected without a range");
    d.branch = Branch::selected;
    d.row = {0.0, 1.0 - p, p};
    d.staged_range = c.selected_range;
  } else if (c.near) {
    d.branch = Branch::near_unselected;
    d.row = {1.0 - p, p, 0.0};
    d.staged_range = cfg.r1();
  } else if (c.db >= cfg.n_sel) {
    d.branch = Branch::far_covered;
    d.row = {1.0, 0.0, 0.0};
  } else {
    d.branch = Branch::far_uncovered;
    d.row = {1.0 - p, p, 0.0};
    d.staged_range = cfg.rl();
  }
  return d;
}

// Fixed-range baseline with GDOP selection and no Sleep state.
inline TransitionDecision ans_transition_row(const TransitionContext& c) {
  TransitionDecision d;
  if (c.current == NodeMode::sleep) throw std::invalid_argument("ans_transition_row: baseline has no Sleep state");
  if (!c.has_info) {
    detail::check_probability(c.p_own, "own");
    d.branch = c.current == NodeMode::lps ? Branch::lps_no_info : Branch::hps_no_info;
    d.row = {0.0, 1.0 - c.p_own, c.p_own};
    return d;
  }
  detail::check_probability(c.p_hat, "predicted");
  if (c.selected) {
    d.branch = Branch::selected;
    d.row = {0.0, 1.0 - c.p_hat, c.p_hat};
  } else {
    d.branch = Branch::near_unselected;
    d.row = {0.0, 1.0, 0.0};
  }
  return d;
}

inline constexpr int kDopsPanels = 8;
inline constexpr int kDopsNodes = 24;

namespace detail {

inline const std::array<std::array<double, 2>, kDopsNodes>& gl24() {
  static const auto table = [] {
    std::array<std::array<double, 2>, kDopsNodes> t{};
    const int n = kDopsNodes;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      t[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
    }
    return t;
  }();
  return table;
}

// Composite Gauss-Legendre over [a, b].
template <class F>
double integrate_angle(F&& f, double a, double b) {
  const auto& gl = gl24();
  const double h = (b - a) / kDopsPanels;
  double s = 0.0;
  for (int p = 0; p < kDopsPanels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (const auto& [x, w] : gl) s += w * f(mid + 0.5 * h * x);
  }
  return 0.5 * h * s;
}

}  // namespace detail

// Gaussian mass inside a disk. Rays are cast from the mean in the whitened
// frame, where the radial integral is closed form.
inline double disk_mass(Point2D center, double radius, const PositionPrediction& pred) {
  if (!(radius > 0.0)) return 0.0;
  Mat2 cov = 0.5 * (pred.cov + pred.cov.transpose());
  const double jitter = 1e-12 * std::max(1.0, cov.trace());
  Eigen::LLT<Mat2> llt(cov + jitter * Mat2::Identity());
  if (llt.info() != Eigen::Success) return distance(pred.mean, center) <= radius ? 1.0 : 0.0;
  const Mat2 L = llt.matrixL();
  const Vec2 d(pred.mean.x - center.x, pred.mean.y - center.y);
  const double c0 = d.squaredNorm() - radius * radius;

  auto along = [&](const Vec2& u) {
    const Vec2 w = L * u;
    const double a = w.squaredNorm(), b = d.dot(w);
    const double disc = b * b - a * c0;
    if (disc <= 0.0) return 0.0;
    const double sq = std::sqrt(disc);
    const double r1 = (-b - sq) / a, r2 = (-b + sq) / a;
    const double lo = std::max(0.0, r1), hi = std::max(0.0, r2);
    if (hi <= lo) return 0.0;
    return (std::exp(-0.5 * lo * lo) - std::exp(-0.5 * hi * hi)) / (2.0 * kPi);
  };

  if (c0 <= 0.0)
    return std::clamp(
        detail::integrate_angle([&](double t) { return along(Vec2(std::cos(t), std::sin(t))); }, 0.0, 2.0 * kPi), 0.0,
        1.0);

  // Mean outside the disk: only a cone of directions hits it.
  const Vec2 Ld = L.transpose() * d;
  const Mat2 M = Ld * Ld.transpose() - c0 * (L.transpose() * L);
  Eigen::SelfAdjointEigenSolver<Mat2> es(M);
  const double lpos = es.eigenvalues()(1), lneg = es.eigenvalues()(0);
  if (!(lpos > 0.0) || !(lneg < 0.0)) return 0.0;
  Vec2 e1 = es.eigenvectors().col(1);
  const Vec2 e2 = es.eigenvectors().col(0);
  if (d.dot(L * e1) > 0.0) e1 = -e1;
  const double half = std::atan(std::sqrt(lpos / -lneg));
  const double m = detail::integrate_angle(
      [&](double t) { return along(std::cos(t) * e1 + std::sin(t) * e2); }, -half, half);
  return std::clamp(m, 0.0, 1.0);
}

inline double dops_probability(Point2D node, double range, const std::vector<PositionPrediction>& preds,
                               const WorldConfig& cfg) {
  double best = 0.0;
  for (const auto& p : preds) best = std::max(best, disk_mass(node, range, p));
  return std::clamp(cfg.p_d * best, 0.0, cfg.p_d);
}

inline NodeMode step_state(const TransitionRow& row, RngStream& rng) {
  const double u = rng.uniform();
  if (u < row.p_to_sleep) return NodeMode::sleep;
  if (u < row.p_to_sleep + row.p_to_lps) return NodeMode::lps;
  if (row.p_to_hps > 0.0) return NodeMode::hps;
  return row.p_to_lps > 0.0 ? NodeMode::lps : NodeMode::sleep;
}

}  // namespace poser
