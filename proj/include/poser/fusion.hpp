#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "poser/config.hpp"
#include "poser/tracking.hpp"
#include "poser/types.hpp"

namespace poser {

struct TrackBroadcast {
  NodeId sender = 0;
  int track_id = 0;
  Vec5 mean = Vec5::Zero();
  Mat5 cov = Mat5::Identity();
  Mat52 gain = Mat52::Zero();
  long step = 0;
  Point2D origin;  // sender position
};

struct FusedEstimate {
  Gaussian5 fused;
  Gaussian5 predicted;
  std::vector<NodeId> members;
};

inline double position_error_trace(const Mat5& cov) { return cov(kX, kX) + cov(kY, kY); }

// trace(H P H^T) with H the range-azimuth Jacobian seen from the sender. Falls
// back to the Cartesian position trace when the estimate sits on the sender.
inline double trust_statistic(const TrackBroadcast& b) {
  const double dx = b.mean(kX) - b.origin.x, dy = b.mean(kY) - b.origin.y;
  if (!(dx * dx + dy * dy > 0.0)) return position_error_trace(b.cov);
  const Mat25 H = measurement_jacobian(b.mean, b.origin);
  return (H * b.cov * H.transpose()).trace();
}

inline std::vector<TrackBroadcast> trustworthy_filter(const std::vector<TrackBroadcast>& ensemble, double xi) {
  std::vector<TrackBroadcast> out;
  for (const auto& b : ensemble)
    if (trust_statistic(b) <= xi) out.push_back(b);
  return out;
}

namespace detail {

inline bool well_conditioned(const Mat5& m) {
  Eigen::SelfAdjointEigenSolver<Mat5> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev(0) > 0.0 && ev(0) / ev(4) > 1e-12;
}

inline bool t2ta_match(const TrackBroadcast& a, const TrackBroadcast& b, const WorldConfig& cfg) {
  const Mat5 S = a.cov + b.cov;
  const Vec5 d = a.mean - b.mean;
  if (well_conditioned(S)) {
    const double m2 = d.dot(S.ldlt().solve(d));
    return m2 <= cfg.t2ta_gate5;
  }
  const Mat2 Sp = position_cov(S);
  const Vec2 dp(d(kX), d(kY));
  const double det = Sp.determinant();
  if (!(det > 0.0)) return dp.squaredNorm() == 0.0;
  return dp.dot(Sp.inverse() * dp) <= cfg.gate;
}

}  // namespace detail

// Pairwise association test followed by connected components. Groups are listed
// by their smallest member index.
inline std::vector<std::vector<std::size_t>> t2ta_group(const std::vector<TrackBroadcast>& ens, const WorldConfig& cfg) {
  const std::size_t n = ens.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (detail::t2ta_match(ens[i], ens[j], cfg)) {
        const std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  return groups;
}

// Information-form fusion under the independence approximation.
inline Gaussian5 t2tf_fuse(const std::vector<Gaussian5>& group) {
  if (group.empty()) throw std::invalid_argument("t2tf_fuse: empty group");
  if (group.size() == 1) return group.front();
  Mat5 info = Mat5::Zero();
  Vec5 vec = Vec5::Zero();
  int used = 0;
  for (const auto& g : group) {
    Eigen::LDLT<Mat5> ldlt(g.cov);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0) continue;
    const Mat5 inv = ldlt.solve(Mat5::Identity());
    info += inv;
    vec += inv * g.mean;
    ++used;
  }
  if (used == 0) return group.front();
  Gaussian5 out;
  out.cov = info.ldlt().solve(Mat5::Identity());
  symmetrize(out.cov);
  out.mean = out.cov * vec;
  return out;
}

inline Gaussian5 predict_fused(const Gaussian5& fused, double dt, const WorldConfig& cfg) {
  return ekf_predict(fused.mean, fused.cov, dt, process_noise(cfg, dt));
}

// Trust filter, association, fusion and one-step prediction. The ensemble is
// sorted by (sender, track id) first so every node fusing the same set gets
// identical arithmetic.
inline std::vector<FusedEstimate> dups(std::vector<TrackBroadcast> ensemble, const WorldConfig& cfg) {
  std::sort(ensemble.begin(), ensemble.end(), [](const TrackBroadcast& a, const TrackBroadcast& b) {
    return a.sender != b.sender ? a.sender < b.sender : a.track_id < b.track_id;
  });
  const auto trusted = trustworthy_filter(ensemble, cfg.trust_tolerance());
  std::vector<FusedEstimate> out;
  for (const auto& grp : t2ta_group(trusted, cfg)) {
    std::vector<Gaussian5> members;
    FusedEstimate fe;
    for (std::size_t i : grp) {
      members.push_back({trusted[i].mean, trusted[i].cov});
      fe.members.push_back(trusted[i].sender);
    }
    fe.fused = t2tf_fuse(members);
    fe.predicted = predict_fused(fe.fused, cfg.dt, cfg);
    out.push_back(std::move(fe));
  }
  return out;
}

}  // namespace poser
