#pragma once

#include <optional>
#include <vector>

#include "poser/config.hpp"
#include "poser/game.hpp"
#include "poser/rng.hpp"
#include "poser/selection.hpp"

namespace poser {

enum class DansPath { none, base_exact, base_egdop, extended_all, extended_game };

inline const char* to_string(DansPath p) {
  switch (p) {
    case DansPath::none:
      return "none";
    case DansPath::base_exact:
      return "base-exact";
    case DansPath::base_egdop:
      return "base-egdop";
    case DansPath::extended_all:
      return "extended-all";
    case DansPath::extended_game:
      return "extended-game";
  }
  return "?";
}

struct GameRecord {
  GameInstance game;
  MaxlogitResult result;
  NodeId leader = 0;
};

struct SelectionOutcome {
  DansPath path = DansPath::none;
  std::vector<NodeId> selected;  // ascending
  std::vector<double> ranges;    // parallel to selected
  int db = 0;
  int de = 0;
  std::vector<Candidate> base_candidates;
  std::vector<Candidate> extended_candidates;
  std::optional<GameRecord> game;

  std::optional<double> range_of(NodeId id) const {
    for (std::size_t i = 0; i < selected.size(); ++i)
      if (selected[i] == id) return ranges[i];
    return std::nullopt;
  }
};

// Builds and solves the range game. The learning stream is derived from the
// leader id so every node solving the same instance draws identical numbers.
inline GameRecord play_range_game(const std::vector<Candidate>& players, const PositionPrediction& pred,
                                  const WorldConfig& cfg, std::uint64_t game_seed) {
  std::vector<NodeId> ids;
  std::vector<Point2D> pos;
  std::vector<double> energies;
  for (const auto& c : players) {
    ids.push_back(c.id);
    pos.push_back(c.pos);
    energies.push_back(c.energy);
  }
  GameRecord rec{make_game(ids, pos, pred.mean, pred.cov, cfg), {}, 0};
  rec.leader = ids[select_leader(ids, energies)];
  RngStream rng(derive_seed(game_seed, {rec.leader}));
  rec.result = maxlogit_solve(rec.game, cfg.maxlogit_iterations, cfg.tau, rng);
  return rec;
}

inline SelectionOutcome dans(const PositionPrediction& pred, const std::vector<Candidate>& awake, const WorldConfig& cfg,
                             std::uint64_t game_seed) {
  SelectionOutcome out;
  const auto base = candidate_region(pred, cfg.r1());
  out.base_candidates = candidate_set(base, awake);
  out.db = static_cast<int>(out.base_candidates.size());
  const auto n_sel = static_cast<std::size_t>(cfg.n_sel);

  auto take = [&](const std::vector<Candidate>& s, DansPath path) {
    out.path = path;
    for (const auto& c : s) {
      out.selected.push_back(c.id);
      out.ranges.push_back(cfg.r1());
    }
  };
  if (out.base_candidates.size() == n_sel) {
    take(out.base_candidates, DansPath::base_exact);
    return out;
  }
  if (out.base_candidates.size() > n_sel) {
    take(select_by_egdop(out.base_candidates, n_sel, base, cfg), DansPath::base_egdop);
    return out;
  }

  const auto ext = candidate_region(pred, cfg.rl());
  out.extended_candidates = candidate_set(ext, awake);
  out.de = static_cast<int>(out.extended_candidates.size());
  if (out.extended_candidates.empty()) return out;

  std::vector<Candidate> players;
  if (out.extended_candidates.size() <= n_sel) {
    out.path = DansPath::extended_all;
    players = out.extended_candidates;
  } else {
    out.path = DansPath::extended_game;
    players = select_by_egdop(out.extended_candidates, static_cast<std::size_t>(cfg.n_sel_prime), ext, cfg);
  }
  auto rec = play_range_game(players, pred, cfg, game_seed);
  for (std::size_t p = 0; p < players.size(); ++p) {
    const int a = rec.result.action[p];
    if (a == 0) continue;
    out.selected.push_back(players[p].id);
    out.ranges.push_back(rec.game.actions[a]);
  }
  out.game = std::move(rec);
  return out;
}

// Baseline selection: pure GDOP inside the fixed-range region.
inline SelectionOutcome ans_select(const PositionPrediction& pred, const std::vector<Candidate>& awake,
                                   const WorldConfig& cfg, double range) {
  SelectionOutcome out;
  const auto region = candidate_region(pred, range);
  out.base_candidates = candidate_set(region, awake);
  out.db = static_cast<int>(out.base_candidates.size());
  const auto n_sel = static_cast<std::size_t>(cfg.n_sel);
  out.path = out.base_candidates.size() > n_sel ? DansPath::base_egdop : DansPath::base_exact;
  if (out.base_candidates.empty()) out.path = DansPath::none;
  for (const auto& c : select_by_gdop(out.base_candidates, n_sel, region, cfg)) {
    out.selected.push_back(c.id);
    out.ranges.push_back(range);
  }
  return out;
}

}  // namespace poser
