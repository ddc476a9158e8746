#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "poser/config.hpp"
#include "poser/tracking.hpp"
#include "poser/types.hpp"

namespace poser {

struct PositionPrediction {
  Point2D mean;
  Mat2 cov = Mat2::Zero();
};

inline PositionPrediction position_prediction(const Gaussian5& g) { return {position_of(g.mean), position_cov(g.cov)}; }

struct CandidateRegion {
  Point2D center;
  double ax = 0.0;
  double ay = 0.0;
  double rs = 0.0;
  bool degenerate = false;  // uncertainty exceeds range
};

inline CandidateRegion candidate_region(const PositionPrediction& p, double rs) {
  CandidateRegion r;
  r.center = p.mean;
  r.rs = rs;
  r.ax = rs - 3.0 * std::sqrt(std::max(0.0, p.cov(0, 0)));
  r.ay = rs - 3.0 * std::sqrt(std::max(0.0, p.cov(1, 1)));
  r.degenerate = !(r.ax > 0.0 && r.ay > 0.0);
  return r;
}

inline double normalized_range_sq(Point2D node, const CandidateRegion& r) {
  const double ax = r.degenerate ? r.rs : r.ax, ay = r.degenerate ? r.rs : r.ay;
  const double u = (node.x - r.center.x) / ax, v = (node.y - r.center.y) / ay;
  return u * u + v * v;
}

// Ellipse test, boundary inclusive. A degenerate region has no members.
inline bool candidate_membership(Point2D node, const CandidateRegion& r) {
  if (r.degenerate) return false;
  return normalized_range_sq(node, r) <= 1.0;
}

struct Candidate {
  NodeId id = 0;
  Point2D pos;
  double energy = 1.0;  // remaining fraction
};

// When the region is degenerate every node within R_s of the predicted mean qualifies.
inline std::vector<Candidate> candidate_set(const CandidateRegion& r, const std::vector<Candidate>& awake) {
  std::vector<Candidate> out;
  for (const auto& c : awake) {
    const bool in = r.degenerate ? distance(c.pos, r.center) <= r.rs : candidate_membership(c.pos, r);
    if (in) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
  return out;
}

enum class SelectorKind { egdop, gdop, max_energy };

// Per-node contribution to the 2x2 geometric information matrix, stored as (a, b, c)
// for [[a, b], [b, c]].
struct InfoTerm {
  double a = 0.0, b = 0.0, c = 0.0;
};

inline InfoTerm info_term(const Candidate& c, const CandidateRegion& r, const WorldConfig& cfg, bool weight_energy) {
  const double phi = std::atan2(c.pos.y - r.center.y, c.pos.x - r.center.x);
  const double s = std::sin(phi), co = std::cos(phi);
  const double sn = cfg.sigma_phi / (2.0 * kPi);
  const double rn2 = std::max(normalized_range_sq(c.pos, r), 1e-12);
  const double k = (weight_energy ? c.energy : 1.0) / (sn * sn * rn2);
  return {k * s * s, -k * s * co, k * co * co};
}

inline double info_ratio(const InfoTerm& J) {
  const double tr = J.a + J.c;
  if (!(tr > 0.0)) return 0.0;
  const double det = J.a * J.c - J.b * J.b;
  return std::max(0.0, det) / tr;
}

inline Mat2 info_matrix(const std::vector<Candidate>& subset, const CandidateRegion& r, const WorldConfig& cfg,
                        bool weight_energy) {
  Mat2 J = Mat2::Zero();
  for (const auto& c : subset) {
    const auto t = info_term(c, r, cfg, weight_energy);
    J(0, 0) += t.a;
    J(0, 1) += t.b;
    J(1, 0) += t.b;
    J(1, 1) += t.c;
  }
  return J;
}

inline double egdop_score(const std::vector<Candidate>& subset, const CandidateRegion& r, const WorldConfig& cfg) {
  if (subset.empty()) throw std::invalid_argument("egdop_score: empty subset");
  InfoTerm J;
  for (const auto& c : subset) {
    const auto t = info_term(c, r, cfg, true);
    J.a += t.a;
    J.b += t.b;
    J.c += t.c;
  }
  return info_ratio(J);
}

inline double gdop_score(std::vector<Candidate> subset, const CandidateRegion& r, const WorldConfig& cfg) {
  for (auto& c : subset) c.energy = 1.0;
  return egdop_score(subset, r, cfg);
}

namespace detail {

struct SubsetKey {
  double mu;
  std::uint64_t id_sum;
  std::vector<NodeId> ids;  // sorted
};

// Larger mu, then smaller id-sum, then lexicographically smaller ids.
inline bool better(const SubsetKey& a, const SubsetKey& b) {
  if (a.mu != b.mu) return a.mu > b.mu;
  if (a.id_sum != b.id_sum) return a.id_sum < b.id_sum;
  return a.ids < b.ids;
}

inline double combinations(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

inline SubsetKey key_of(const std::vector<std::size_t>& idx, const std::vector<InfoTerm>& terms,
                        const std::vector<Candidate>& cands) {
  InfoTerm J;
  SubsetKey k{0.0, 0, {}};
  for (std::size_t i : idx) {
    J.a += terms[i].a;
    J.b += terms[i].b;
    J.c += terms[i].c;
    k.id_sum += cands[i].id;
    k.ids.push_back(cands[i].id);
  }
  std::sort(k.ids.begin(), k.ids.end());
  k.mu = info_ratio(J);
  return k;
}

}  // namespace detail

inline constexpr double kExhaustiveLimit = 5000.0;

// Subset of `count` candidates maximizing det(J)/trace(J). Exhaustive below the
// combination limit, otherwise best pair + greedy growth + one swap pass.
inline std::vector<Candidate> select_by_score(std::vector<Candidate> cands, std::size_t count, const CandidateRegion& r,
                                              const WorldConfig& cfg, bool weight_energy,
                                              bool force_exhaustive = false) {
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
  const std::size_t n = cands.size();
  if (count >= n) return cands;
  if (count == 0) return {};
  std::vector<InfoTerm> terms;
  for (const auto& c : cands) terms.push_back(info_term(c, r, cfg, weight_energy));

  std::vector<std::size_t> best_idx;
  if (force_exhaustive || detail::combinations(n, count) <= kExhaustiveLimit) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), 0);
    detail::SubsetKey best = detail::key_of(idx, terms, cands);
    best_idx = idx;
    while (true) {
      std::size_t i = count;
      while (i > 0 && idx[i - 1] == n - count + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < count; ++j) idx[j] = idx[j - 1] + 1;
      auto k = detail::key_of(idx, terms, cands);
      if (detail::better(k, best)) {
        best = std::move(k);
        best_idx = idx;
      }
    }
  } else {
    std::vector<std::size_t> sel;
    if (count == 1) {
      sel = {0};
    } else {
      detail::SubsetKey best{-1.0, 0, {}};
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          auto k = detail::key_of({i, j}, terms, cands);
          if (best.mu < 0.0 || detail::better(k, best)) {
            best = std::move(k);
            sel = {i, j};
          }
        }
    }
    std::vector<char> in(n, 0);
    for (auto i : sel) in[i] = 1;
    while (sel.size() < count) {
      detail::SubsetKey best{-1.0, 0, {}};
      std::size_t pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (in[i]) continue;
        auto trial = sel;
        trial.push_back(i);
        auto k = detail::key_of(trial, terms, cands);
        if (pick == n || detail::better(k, best)) {
          best = std::move(k);
          pick = i;
        }
      }
      sel.push_back(pick);
      in[pick] = 1;
    }
    auto cur = detail::key_of(sel, terms, cands);
    for (std::size_t s = 0; s < sel.size(); ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        if (in[i]) continue;
        auto trial = sel;
        trial[s] = i;
        auto k = detail::key_of(trial, terms, cands);
        if (detail::better(k, cur)) {
          in[sel[s]] = 0;
          in[i] = 1;
          sel = std::move(trial);
          cur = std::move(k);
        }
      }
    }
    best_idx = sel;
  }
  std::sort(best_idx.begin(), best_idx.end());
  std::vector<Candidate> out;
  for (auto i : best_idx) out.push_back(cands[i]);
  return out;
}

inline std::vector<Candidate> select_by_egdop(const std::vector<Candidate>& cands, std::size_t count,
                                              const CandidateRegion& r, const WorldConfig& cfg) {
  return select_by_score(cands, count, r, cfg, true);
}

inline std::vector<Candidate> select_by_gdop(const std::vector<Candidate>& cands, std::size_t count,
                                             const CandidateRegion& r, const WorldConfig& cfg) {
  return select_by_score(cands, count, r, cfg, false);
}

// Top `count` by remaining energy, ties to the smallest id.
inline std::vector<Candidate> select_max_energy(std::vector<Candidate> cands, std::size_t count) {
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.energy != b.energy ? a.energy > b.energy : a.id < b.id;
  });
  if (cands.size() > count) cands.resize(count);
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
  return cands;
}

inline std::vector<Candidate> select_nodes(SelectorKind kind, const std::vector<Candidate>& cands, std::size_t count,
                                           const CandidateRegion& r, const WorldConfig& cfg) {
  switch (kind) {
    case SelectorKind::egdop:
      return select_by_egdop(cands, count, r, cfg);
    case SelectorKind::gdop:
      return select_by_gdop(cands, count, r, cfg);
    case SelectorKind::max_energy:
      return select_max_energy(cands, count);
  }
  return {};
}

}  // namespace poser
