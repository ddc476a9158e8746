#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "poser/config.hpp"
#include "poser/target.hpp"
#include "poser/types.hpp"

namespace poser {

enum class TrackStatus : std::uint8_t { tentative, confirmed, dropped };

struct Track {
  int id = 0;
  Vec5 mean = Vec5::Zero();
  Mat5 cov = Mat5::Identity();
  Mat52 gain = Mat52::Zero();
  TrackStatus status = TrackStatus::tentative;
  std::uint32_t hits = 0;  // bit i = outcome i scans ago
  int outcomes = 0;
  int miss_streak = 0;
};

struct Gaussian5 {
  Vec5 mean = Vec5::Zero();
  Mat5 cov = Mat5::Identity();
};

inline Gaussian5 ekf_predict(const Vec5& mean, const Mat5& cov, double dt, const Mat5& Q) {
  const Mat5 F = ct_jacobian(mean, dt);
  Gaussian5 g;
  g.mean = ct_transition(mean, dt);
  g.cov = F * cov * F.transpose() + Q;
  symmetrize(g.cov);
  return g;
}

inline Gaussian5 ekf_predict(const Track& t, double dt, const WorldConfig& cfg) {
  return ekf_predict(t.mean, t.cov, dt, process_noise(cfg, dt));
}

inline Mat2 measurement_noise(const WorldConfig& cfg) {
  Mat2 R = Mat2::Zero();
  R(0, 0) = cfg.sigma_r * cfg.sigma_r;
  R(1, 1) = cfg.sigma_phi * cfg.sigma_phi;
  return R;
}

inline Vec2 innovation(const Measurement& m, const Vec2& zhat) {
  return {m.range - zhat(0), wrap_angle(m.azimuth - zhat(1))};
}

struct AssociationResult {
  // beta[t][0] is the no-measurement event; beta[t][j+1] belongs to measurement j.
  std::vector<std::vector<double>> beta;
  std::vector<int> unassociated;
  std::vector<bool> gated_any;  // per track: some measurement fell in its gate
};

namespace detail {

struct GateInfo {
  bool ok = false;
  Vec2 zhat;
  Mat2 S;
  Mat2 Sinv;
  Mat25 H;
  double norm = 0.0;  // 1 / (2 pi sqrt(det S))
};

struct JpdaEnumerator {
  const std::vector<std::vector<int>>& gated;       // per track, gated measurement indices
  const std::vector<std::vector<double>>& lik;      // per track, per measurement index: p_d * N
  double miss_w;                                    // 1 - p_d * P_G
  double lambda;
  int n_valid;
  std::vector<int> assign;
  std::vector<char> used;
  std::vector<std::vector<double>> acc;  // per track, per measurement+1
  double total = 0.0;
  int best_assigned = -1;
  bool zero_clutter = false;

  void run(std::size_t t, double w, int assigned) {
    if (t == gated.size()) {
      if (zero_clutter) {
        if (assigned < best_assigned) return;
        if (assigned > best_assigned) {
          best_assigned = assigned;
          total = 0.0;
          for (auto& row : acc) std::fill(row.begin(), row.end(), 0.0);
        }
      } else {
        w *= std::pow(lambda, n_valid - assigned);
      }
      total += w;
      for (std::size_t k = 0; k < assign.size(); ++k) acc[k][assign[k] + 1] += w;
      return;
    }
    assign[t] = -1;
    run(t + 1, w * miss_w, assigned);
    for (int j : gated[t]) {
      if (used[j]) continue;
      used[j] = 1;
      assign[t] = j;
      run(t + 1, w * lik[t][j], assigned + 1);
      used[j] = 0;
    }
    assign[t] = -1;
  }
};

}  // namespace detail

// Parametric JPDA over the node's live tracks; tracks must already be predicted
// to the scan time. Clutter density is uniform over the node's sensing disk.
inline AssociationResult jpda_update(std::vector<Track>& tracks, const std::vector<Measurement>& meas, Point2D node,
                                     double hps_range, const WorldConfig& cfg) {
  const std::size_t nt = tracks.size(), nm = meas.size();
  AssociationResult res;
  res.beta.assign(nt, std::vector<double>(nm + 1, 0.0));
  res.gated_any.assign(nt, false);
  const Mat2 R = measurement_noise(cfg);
  const double pg = 0.99;
  std::vector<detail::GateInfo> gi(nt);
  std::vector<std::vector<int>> gated(nt);
  std::vector<std::vector<double>> lik(nt, std::vector<double>(nm, 0.0));
  std::vector<char> in_any(nm, 0);
  for (std::size_t t = 0; t < nt; ++t) {
    if (tracks[t].status == TrackStatus::dropped) continue;
    auto& g = gi[t];
    const double dx = tracks[t].mean(kX) - node.x, dy = tracks[t].mean(kY) - node.y;
    if (dx * dx + dy * dy <= 0.0) continue;
    g.H = measurement_jacobian(tracks[t].mean, node);
    g.zhat = measure_h(tracks[t].mean, node);
    g.S = g.H * tracks[t].cov * g.H.transpose() + R;
    const double det = g.S.determinant();
    if (!(det > 0.0) || !std::isfinite(det)) {
      tracks[t].status = TrackStatus::dropped;
      continue;
    }
    g.Sinv = g.S.inverse();
    g.norm = 1.0 / (2.0 * kPi * std::sqrt(det));
    g.ok = true;
    for (std::size_t j = 0; j < nm; ++j) {
      const Vec2 nu = innovation(meas[j], g.zhat);
      const double d2 = nu.dot(g.Sinv * nu);
      if (d2 <= cfg.gate) {
        gated[t].push_back(static_cast<int>(j));
        lik[t][j] = cfg.p_d * g.norm * std::exp(-0.5 * d2);
        in_any[j] = 1;
      }
    }
    res.gated_any[t] = !gated[t].empty();
  }
  int n_valid = 0;
  for (char c : in_any) n_valid += c;
  for (std::size_t j = 0; j < nm; ++j)
    if (!in_any[j]) res.unassociated.push_back(static_cast<int>(j));

  const double area = kPi * hps_range * hps_range;
  const double lambda = area > 0.0 ? cfg.mu_cl / area : 0.0;
  detail::JpdaEnumerator en{gated, lik, 1.0 - cfg.p_d * pg, lambda, n_valid, std::vector<int>(nt, -1),
                            std::vector<char>(nm, 0), std::vector<std::vector<double>>(nt, std::vector<double>(nm + 1, 0.0))};
  en.zero_clutter = !(lambda > 0.0);
  en.run(0, 1.0, 0);

  for (std::size_t t = 0; t < nt; ++t) {
    auto& tr = tracks[t];
    if (tr.status == TrackStatus::dropped || !gi[t].ok) {
      res.beta[t][0] = 1.0;
      continue;
    }
    if (en.total > 0.0) {
      double s = 0.0;
      for (std::size_t j = 1; j <= nm; ++j) {
        res.beta[t][j] = en.acc[t][j] / en.total;
        s += res.beta[t][j];
      }
      res.beta[t][0] = 1.0 - s;
    } else {
      res.beta[t][0] = 1.0;
    }
    if (gated[t].empty()) continue;
    const auto& g = gi[t];
    const Mat52 K = tr.cov * g.H.transpose() * g.Sinv;
    Vec2 nu = Vec2::Zero();
    Mat2 spread = Mat2::Zero();
    for (int j : gated[t]) {
      const double b = res.beta[t][j + 1];
      const Vec2 nj = innovation(meas[j], g.zhat);
      nu += b * nj;
      spread += b * nj * nj.transpose();
    }
    const double b0 = res.beta[t][0];
    const Mat5 Pc = tr.cov - K * g.S * K.transpose();
    tr.mean += K * nu;
    tr.cov = b0 * tr.cov + (1.0 - b0) * Pc + K * (spread - nu * nu.transpose()) * K.transpose();
    symmetrize(tr.cov);
    tr.gain = K;
  }
  return res;
}

inline Track initialize_track(const Measurement& m, Point2D node, const WorldConfig& cfg, int id) {
  Track t;
  t.id = id;
  const double c = std::cos(m.azimuth), s = std::sin(m.azimuth), r = m.range;
  t.mean << node.x + r * c, 0.0, node.y + r * s, 0.0, 0.0;
  Mat2 G;
  G << c, -r * s, s, r * c;
  const Mat2 Pp = G * measurement_noise(cfg) * G.transpose();
  t.cov = Mat5::Zero();
  t.cov(kX, kX) = Pp(0, 0);
  t.cov(kX, kY) = Pp(0, 1);
  t.cov(kY, kX) = Pp(1, 0);
  t.cov(kY, kY) = Pp(1, 1);
  const double vv = (cfg.v_max / 3.0) * (cfg.v_max / 3.0);
  t.cov(kVx, kVx) = vv;
  t.cov(kVy, kVy) = vv;
  t.cov(kPsi, kPsi) = cfg.sigma_vpsi * cfg.sigma_vpsi;
  t.status = TrackStatus::tentative;
  t.hits = 1;
  t.outcomes = 1;
  t.miss_streak = 0;
  return t;
}

inline int window_hits(const Track& t, int n) {
  int h = 0;
  for (int i = 0; i < n && i < t.outcomes; ++i) h += (t.hits >> i) & 1u;
  return h;
}

inline void mofn_update(Track& t, bool associated, const WorldConfig& cfg) {
  if (t.status == TrackStatus::dropped) return;
  t.hits = (t.hits << 1) | (associated ? 1u : 0u);
  ++t.outcomes;
  t.miss_streak = associated ? 0 : t.miss_streak + 1;
  if (t.status == TrackStatus::tentative) {
    if (window_hits(t, cfg.confirm_n) >= cfg.confirm_m) {
      t.status = TrackStatus::confirmed;
    } else if (t.outcomes >= cfg.confirm_n && window_hits(t, cfg.confirm_n) == 0) {
      t.status = TrackStatus::dropped;
    }
  } else if (t.status == TrackStatus::confirmed && t.miss_streak >= cfg.confirm_m) {
    t.status = TrackStatus::dropped;
  }
}

}  // namespace poser
