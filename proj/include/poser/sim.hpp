#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "poser/config.hpp"
#include "poser/dans.hpp"
#include "poser/deployment.hpp"
#include "poser/energy.hpp"
#include "poser/fusion.hpp"
#include "poser/pfsa.hpp"
#include "poser/rng.hpp"
#include "poser/target.hpp"
#include "poser/tracking.hpp"
#include "poser/types.hpp"

namespace poser {

enum class Scheduler { poser, ans, lpshps, random };

inline const char* to_string(Scheduler s) {
  switch (s) {
    case Scheduler::poser:
      return "poser";
    case Scheduler::ans:
      return "ans";
    case Scheduler::lpshps:
      return "lpshps";
    case Scheduler::random:
      return "random";
  }
  return "?";
}

inline Scheduler parse_scheduler(const std::string& s) {
  if (s == "poser") return Scheduler::poser;
  if (s == "ans") return Scheduler::ans;
  if (s == "lpshps") return Scheduler::lpshps;
  if (s == "random") return Scheduler::random;
  throw std::invalid_argument("unknown scheduler: " + s);
}

struct GapSpec {
  Point2D center;
  double radius = 0.0;
};

struct Scenario {
  Scheduler scheduler = Scheduler::poser;
  int steps = 200;
  int targets = 1;                // present at once
  double target_speed = 5.0;      // m/s
  double lane_y = std::numeric_limits<double>::quiet_NaN();  // NaN: random lane per target
  bool respawn = false;           // replace targets that leave the region
  std::optional<GapSpec> gap;
  bool gap_at_target = false;     // center the gap on target 0's position at gap_time
  double gap_time = 50.0;
  bool record_energy = false;
  bool stop_when_tube_dead = false;
  double tube_radius = 0.0;  // > 0: tube around the lane used for lifetime
  bool collect_games = false;
};

struct TargetTruth {
  int id = 0;
  TargetState state = TargetState::Zero();
  bool active = true;
};

struct NodeState {
  NodeId id = 0;
  Point2D pos;
  NodeMode mode = NodeMode::lps;
  double hps_range = 0.0;
  double staged_range = 0.0;
  EnergyLedger ledger;
  std::vector<Track> tracks;
  int next_track_id = 0;
  RngStream rng;
  bool alive = true;
  std::vector<NodeId> neighbors;

  // Per-step scratch.
  bool lps_detect = false;
  int n_tx = 0;
};

struct TargetStepRow {
  int target = 0;
  double x = 0.0, y = 0.0;
  bool in_roi = false;
  bool covered = false;  // inside some HPS node's active disk
  bool tracked = false;  // some confirmed track within its 3-sigma gate
  int hps_near = 0;      // HPS nodes within R_L
};

struct StepLog {
  long step = 0;
  double time = 0.0;
  std::vector<TargetStepRow> targets;
  int n_sleep = 0, n_lps = 0, n_hps = 0, n_dead = 0;
  int paths[5] = {0, 0, 0, 0, 0};
  int games = 0;
  double energy_step = 0.0;
  double energy_near_sum = 0.0;
  int energy_near_n = 0;
  double energy_far_sum = 0.0;
  int energy_far_n = 0;
  double sq_pos = 0.0, sq_vel = 0.0;
  int est_pairs = 0;
  std::vector<GameRecord> game_records;  // filled when the scenario asks for them
};

struct World {
  WorldConfig cfg;
  Scenario sc;
  std::uint64_t master = 1;
  std::uint64_t run = 0;
  std::vector<NodeState> nodes;
  std::vector<TargetTruth> targets;
  long k = 0;
  int next_target_id = 0;
  RngStream env;
  EnergyTrace trace;
  std::vector<NodeId> tube;
};

inline double scheduler_range(const World& w) {
  return w.sc.scheduler == Scheduler::poser ? w.cfg.r1() : w.cfg.fixed_range;
}

inline void inject_gap(World& w, Point2D center, double radius) {
  if (radius < 0.0) throw std::invalid_argument("inject_gap: negative radius");
  if (radius == 0.0) return;
  for (auto& n : w.nodes)
    if (distance(n.pos, center) <= radius) {
      n.ledger.e0 = 0.0;
      n.alive = false;
      n.mode = NodeMode::sleep;
      n.tracks.clear();
    }
}

namespace detail {

inline TargetTruth spawn_target(World& w, double x0) {
  TargetTruth t;
  t.id = w.next_target_id++;
  const double lane = std::isnan(w.sc.lane_y)
                          ? w.env.uniform(w.cfg.rl(), std::max(w.cfg.rl(), w.cfg.region_height - w.cfg.rl()))
                          : w.sc.lane_y;
  t.state << x0, w.sc.target_speed, lane, 0.0, 0.0;
  return t;
}

inline bool in_region(const WorldConfig& cfg, Point2D p) {
  return p.x >= 0.0 && p.x <= cfg.region_width && p.y >= 0.0 && p.y <= cfg.region_height;
}

inline std::uint64_t ensemble_hash(const std::vector<std::uint64_t>& key) {
  std::uint64_t h = 1469598103934665603ull;
  for (auto v : key) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace detail

inline World make_world(const WorldConfig& cfg, const Scenario& sc, std::uint64_t master, std::uint64_t run,
                        bool validate = true) {
  if (validate) validate_config(cfg);
  World w;
  w.cfg = cfg;
  w.sc = sc;
  w.master = master;
  w.run = run;
  w.env = RngStream::environment(master, run);
  const auto positions = uniform_deployment(cfg, master, run);
  const double r0 = sc.scheduler == Scheduler::poser ? cfg.r1() : cfg.fixed_range;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    NodeState s;
    s.id = static_cast<NodeId>(i);
    s.pos = positions[i];
    s.ledger.e0 = cfg.e0;
    s.rng = RngStream::node(master, run, s.id);
    s.hps_range = r0;
    s.staged_range = r0;
    s.mode = sc.scheduler == Scheduler::random ? NodeMode::hps : NodeMode::lps;
    s.neighbors = neighborhood(s.id, positions, cfg.r_c);
    w.nodes.push_back(std::move(s));
  }

  const int lam = std::max(0, sc.targets);
  for (int i = 0; i < lam; ++i) {
    const double x0 = sc.respawn ? cfg.region_width * i / lam : 0.0;
    w.targets.push_back(detail::spawn_target(w, x0));
  }
  if (sc.gap) inject_gap(w, sc.gap->center, sc.gap->radius);
  if (sc.tube_radius > 0.0 && !std::isnan(sc.lane_y)) {
    std::vector<Point2D> pos;
    for (const auto& nd : w.nodes) pos.push_back(nd.pos);
    w.tube = tube_membership(pos, {{0.0, sc.lane_y}, {cfg.region_width, sc.lane_y}}, sc.tube_radius);
  }
  if (sc.record_energy)
    for (const auto& nd : w.nodes) w.trace.e0.push_back(nd.ledger.e0);
  return w;
}

// Straight-line position of target 0 at time t, used to place a gap ahead of it.

namespace detail {

struct DncEntry {
  std::vector<FusedEstimate> estimates;
  std::vector<SelectionOutcome> outcomes;
  std::vector<PositionPrediction> predictions;
};

inline void local_tracking(NodeState& n, const std::vector<Point2D>& truths, const WorldConfig& cfg) {
  const Mat5 Q = process_noise(cfg, cfg.dt);
  for (auto& t : n.tracks) {
    const auto g = ekf_predict(t.mean, t.cov, cfg.dt, Q);
    t.mean = g.mean;
    t.cov = g.cov;
  }
  const auto meas = hps_measure(n.id, n.pos, n.hps_range, truths, cfg, n.rng);
  const auto res = jpda_update(n.tracks, meas, n.pos, n.hps_range, cfg);
  for (std::size_t i = 0; i < n.tracks.size(); ++i)
    if (n.tracks[i].status != TrackStatus::dropped) mofn_update(n.tracks[i], res.gated_any[i], cfg);
  for (int j : res.unassociated) {
    if (meas[j].range <= 0.0) continue;
    n.tracks.push_back(initialize_track(meas[j], n.pos, cfg, n.next_track_id++));
  }
  n.tracks.erase(std::remove_if(n.tracks.begin(), n.tracks.end(),
                                [](const Track& t) { return t.status == TrackStatus::dropped; }),
                 n.tracks.end());
}

inline double own_hps_probability(const NodeState& n, const WorldConfig& cfg) {
  std::vector<PositionPrediction> preds;
  for (const auto& t : n.tracks) preds.push_back({position_of(t.mean), position_cov(t.cov)});
  if (preds.empty()) return 0.0;
  return dops_probability(n.pos, n.hps_range, preds, cfg);
}

// Hand a fused estimate to a node that will sense next step but holds no local
// track for it. Existing local tracks are left untouched.
inline void seed_tracks(NodeState& n, const std::vector<FusedEstimate>& ests, double range, const WorldConfig& cfg) {
  for (const auto& fe : ests) {
    const Point2D p = position_of(fe.predicted.mean);
    if (distance(p, n.pos) > range) continue;
    bool matched = false;
    for (const auto& t : n.tracks) {
      const Mat2 S = position_cov(t.cov) + position_cov(fe.fused.cov);
      const Vec2 d(t.mean(kX) - fe.fused.mean(kX), t.mean(kY) - fe.fused.mean(kY));
      if (S.determinant() > 0.0 && d.dot(S.inverse() * d) <= cfg.gate) matched = true;
    }
    if (matched) continue;
    Track t;
    t.id = n.next_track_id++;
    t.mean = fe.fused.mean;
    t.cov = fe.fused.cov;
    t.status = TrackStatus::confirmed;
    t.hits = 1;
    t.outcomes = 1;
    n.tracks.push_back(t);
  }
}

// Target motion draws only from the environment stream, so it does not depend on node behaviour.
inline void advance_targets(World& w) {
  for (auto& t : w.targets) {
    if (!t.active) continue;
    t.state = propagate_target(t.state, w.cfg.dt, w.cfg, w.env);
    if (!in_region(w.cfg, position_of(t.state))) {
      if (w.sc.respawn) {
        t = spawn_target(w, 0.0);
      } else {
        t.active = false;
      }
    }
  }
}

}  // namespace detail

// True position of target 0 at time t, replayed on a copy of the world.
inline Point2D target_position_at(World w, double t) {
  if (w.targets.empty()) throw std::invalid_argument("target_position_at: no target");
  const long steps = std::lround(t / w.cfg.dt);
  Point2D last = position_of(w.targets.front().state);
  for (long k = 0; k < steps && w.targets.front().active; ++k) {
    detail::advance_targets(w);
    if (w.targets.front().active) last = position_of(w.targets.front().state);
  }
  return last;
}

inline StepLog run_step(World& w) {
  const auto& cfg = w.cfg;
  const Scheduler sched = w.sc.scheduler;
  StepLog log;
  log.step = w.k;
  log.time = (w.k + 1) * cfg.dt;

  // (1) targets
  detail::advance_targets(w);
  std::vector<Point2D> truths;
  std::vector<int> truth_index;
  for (std::size_t i = 0; i < w.targets.size(); ++i)
    if (w.targets[i].active) {
      truths.push_back(position_of(w.targets[i].state));
      truth_index.push_back(static_cast<int>(i));
    }

  // (2) sensing
  for (auto& n : w.nodes) {
    n.lps_detect = false;
    n.n_tx = 0;
    if (!n.alive) continue;
    if (n.mode == NodeMode::lps) {
      n.lps_detect = sample_lps(n.pos, truths, cfg, n.rng).detected;
    } else if (n.mode == NodeMode::hps) {
      detail::local_tracking(n, truths, cfg);
    }
  }

  // Coverage and tracking snapshot for this step.
  for (std::size_t i = 0; i < truths.size(); ++i) {
    TargetStepRow row;
    row.target = w.targets[truth_index[i]].id;
    row.x = truths[i].x;
    row.y = truths[i].y;
    row.in_roi = detail::in_region(cfg, truths[i]);
    for (const auto& n : w.nodes) {
      if (!n.alive || n.mode != NodeMode::hps) continue;
      const double d = distance(n.pos, truths[i]);
      if (d <= n.hps_range) row.covered = true;
      if (d <= cfg.rl()) ++row.hps_near;
      for (const auto& t : n.tracks) {
        if (t.status != TrackStatus::confirmed) continue;
        const Vec2 e(t.mean(kX) - truths[i].x, t.mean(kY) - truths[i].y);
        if (e.squaredNorm() <= 9.0 * position_cov(t.cov).trace()) row.tracked = true;
      }
    }
    log.targets.push_back(row);
  }

  // (3) track broadcasts, delivered to awake neighbors and the sender itself
  const bool collaborative = sched == Scheduler::poser || sched == Scheduler::ans;
  std::vector<std::vector<TrackBroadcast>> inbox(w.nodes.size());
  if (collaborative) {
    for (auto& n : w.nodes) {
      if (!n.alive || n.mode != NodeMode::hps) continue;
      std::vector<TrackBroadcast> out;
      for (const auto& t : n.tracks)
        if (t.status == TrackStatus::confirmed) out.push_back({n.id, t.id, t.mean, t.cov, t.gain, w.k, n.pos});
      if (out.empty()) continue;
      n.n_tx += 1;
      auto deliver = [&](NodeId to) {
        const auto& r = w.nodes[to];
        if (!r.alive || r.mode == NodeMode::sleep) return;
        inbox[to].insert(inbox[to].end(), out.begin(), out.end());
      };
      deliver(n.id);
      for (NodeId nb : n.neighbors) deliver(nb);
    }
  }

  // (4) collaboration, cached per distinct ensemble so equal inputs give equal outputs
  std::vector<Candidate> awake;
  for (const auto& n : w.nodes)
    if (n.alive && n.mode != NodeMode::sleep && !inbox[n.id].empty())
      awake.push_back({n.id, n.pos, n.ledger.remaining_fraction()});

  std::map<std::vector<std::uint64_t>, detail::DncEntry> cache;
  std::vector<const detail::DncEntry*> dnc(w.nodes.size(), nullptr);
  std::vector<char> energy_tx(w.nodes.size(), 0), leader_tx(w.nodes.size(), 0);
  const double fixed = cfg.fixed_range;
  if (collaborative) {
    for (const auto& n : w.nodes) {
      if (inbox[n.id].empty()) continue;
      std::vector<std::uint64_t> key;
      for (const auto& b : inbox[n.id])
        key.push_back((static_cast<std::uint64_t>(b.sender) << 32) | static_cast<std::uint32_t>(b.track_id));
      std::sort(key.begin(), key.end());
      auto it = cache.find(key);
      if (it == cache.end()) {
        detail::DncEntry e;
        e.estimates = dups(inbox[n.id], cfg);
        const std::uint64_t hash = detail::ensemble_hash(key);
        for (std::size_t c = 0; c < e.estimates.size(); ++c) {
          const auto pred = position_prediction(e.estimates[c].predicted);
          e.predictions.push_back(pred);
          const std::uint64_t seed =
              derive_seed(w.master, {w.run, static_cast<std::uint64_t>(StreamTag::game), static_cast<std::uint64_t>(w.k),
                                     hash, static_cast<std::uint64_t>(c)});
          e.outcomes.push_back(sched == Scheduler::poser ? dans(pred, awake, cfg, seed)
                                                         : ans_select(pred, awake, cfg, fixed));
        }
        it = cache.emplace(std::move(key), std::move(e)).first;
        for (const auto& o : it->second.outcomes) {
          ++log.paths[static_cast<int>(o.path)];
          if (o.game) ++log.games;
          if (o.game && w.sc.collect_games) log.game_records.push_back(*o.game);
        }
      }
      dnc[n.id] = &it->second;
      for (const auto& o : it->second.outcomes) {
        for (const auto& c : o.base_candidates) energy_tx[c.id] = 1;
        for (const auto& c : o.extended_candidates) energy_tx[c.id] = 1;
        if (o.game) leader_tx[o.game->leader] = 1;
      }
    }
  }
  for (auto& n : w.nodes) n.n_tx += energy_tx[n.id] + leader_tx[n.id];

  // Fused estimates against truth.
  for (const auto& [key, e] : cache)
    for (const auto& fe : e.estimates) {
      double best = std::numeric_limits<double>::infinity();
      int bi = -1;
      const double gate = 9.0 * position_cov(fe.fused.cov).trace();
      for (std::size_t i = 0; i < truths.size(); ++i) {
        const Vec2 d(fe.fused.mean(kX) - truths[i].x, fe.fused.mean(kY) - truths[i].y);
        if (d.squaredNorm() <= gate && d.squaredNorm() < best) {
          best = d.squaredNorm();
          bi = static_cast<int>(i);
        }
      }
      if (bi < 0) continue;
      const auto& s = w.targets[truth_index[bi]].state;
      log.sq_pos += best;
      log.sq_vel += std::pow(fe.fused.mean(kVx) - s(kVx), 2) + std::pow(fe.fused.mean(kVy) - s(kVy), 2);
      ++log.est_pairs;
    }

  // (5) transitions; decisions are collected first and applied afterwards
  struct Next {
    NodeMode mode = NodeMode::sleep;
    double range = 0.0;
    double staged = 0.0;
  };
  std::vector<Next> next(w.nodes.size());
  for (auto& n : w.nodes) {
    auto& nx = next[n.id];
    nx.mode = n.mode;
    nx.range = n.hps_range;
    nx.staged = n.staged_range;
    if (!n.alive) continue;
    const double own = n.mode == NodeMode::lps ? (n.lps_detect ? 1.0 : 0.0) : detail::own_hps_probability(n, cfg);
    switch (sched) {
      case Scheduler::poser:
      case Scheduler::ans: {
        TransitionContext ctx;
        ctx.current = n.mode;
        ctx.p_own = own;
        const auto* e = dnc[n.id];
        ctx.has_info = e && !e->estimates.empty();
        if (ctx.has_info) {
          ctx.dnc_valid = true;
          ctx.db = std::numeric_limits<int>::max();
          for (std::size_t c = 0; c < e->outcomes.size(); ++c) {
            const auto& o = e->outcomes[c];
            if (auto r = o.range_of(n.id)) {
              ctx.selected = true;
              ctx.selected_range = std::max(ctx.selected_range, *r);
            }
            if (distance(n.pos, e->predictions[c].mean) <= cfg.r1()) ctx.near = true;
            ctx.db = std::min(ctx.db, o.db);
          }
          double r = ctx.selected ? ctx.selected_range : (ctx.near ? cfg.r1() : cfg.rl());
          if (sched == Scheduler::ans) r = fixed;
          ctx.p_hat = dops_probability(n.pos, r, e->predictions, cfg);
        }
        const auto d = sched == Scheduler::poser ? transition_row(ctx, cfg) : ans_transition_row(ctx);
        if (d.staged_range) nx.staged = *d.staged_range;
        nx.mode = step_state(d.row, n.rng);
        if (sched == Scheduler::ans) {
          nx.range = fixed;
        } else {
          if (nx.mode == NodeMode::sleep) nx.staged = cfg.r1();
          if (nx.mode == NodeMode::hps) nx.range = d.staged_range ? *d.staged_range : (n.mode == NodeMode::hps ? n.hps_range : nx.staged);
        }
        break;
      }
      case Scheduler::lpshps: {
        bool live = false;
        for (const auto& t : n.tracks) live |= t.status != TrackStatus::dropped;
        if (n.mode == NodeMode::lps)
          nx.mode = n.lps_detect ? NodeMode::hps : NodeMode::lps;
        else
          nx.mode = live ? NodeMode::hps : NodeMode::lps;
        nx.range = fixed;
        break;
      }
      case Scheduler::random:
        nx.mode = n.rng.bernoulli(cfg.p_rand) ? NodeMode::sleep : NodeMode::hps;
        nx.range = fixed;
        break;
    }
  }

  // (6) energy for the step just sensed, then commit the transitions
  std::vector<bool> near_target(w.nodes.size(), false);
  for (const auto& n : w.nodes)
    for (const auto& p : truths)
      if (distance(n.pos, p) <= cfg.rl()) near_target[n.id] = true;
  for (auto& n : w.nodes) {
    if (!n.alive) {
      ++log.n_dead;
      continue;
    }
    switch (n.mode) {
      case NodeMode::sleep:
        ++log.n_sleep;
        break;
      case NodeMode::lps:
        ++log.n_lps;
        break;
      case NodeMode::hps:
        ++log.n_hps;
        break;
    }
    const auto f = flags_for_mode(n.mode, n.mode == NodeMode::sleep ? 0 : n.n_tx, n.hps_range);
    const auto e = device_energy(f, cfg, cfg.dt);
    double sum = 0.0;
    for (double x : e) sum += x;
    const double room = std::max(0.0, n.ledger.e0 - n.ledger.consumed_total);
    if (sum > room && sum > 0.0) {
      auto scaled = e;
      for (double& x : scaled) x *= room / sum;
      charge(n.ledger, scaled);
      sum = room;
    } else {
      charge(n.ledger, e);
    }
    log.energy_step += sum;
    if (near_target[n.id]) {
      log.energy_near_sum += sum;
      ++log.energy_near_n;
    } else {
      log.energy_far_sum += sum;
      ++log.energy_far_n;
    }
  }
  for (auto& n : w.nodes) {
    if (!n.alive) continue;
    if (n.ledger.dead()) {
      n.alive = false;
      n.mode = NodeMode::sleep;
      n.tracks.clear();
      continue;
    }
    const auto& nx = next[n.id];
    const bool entering = nx.mode == NodeMode::hps;
    if (sched == Scheduler::poser && entering && dnc[n.id])
      detail::seed_tracks(n, dnc[n.id]->estimates, nx.range, cfg);
    if (nx.mode != NodeMode::hps) n.tracks.clear();
    n.mode = nx.mode;
    n.hps_range = nx.range;
    n.staged_range = nx.staged;
  }

  if (w.sc.record_energy) {
    w.trace.time.push_back(log.time);
    std::vector<double> row;
    row.reserve(w.nodes.size());
    for (const auto& n : w.nodes) row.push_back(n.ledger.consumed_total);
    w.trace.consumed.push_back(std::move(row));
  }
  ++w.k;
  return log;
}

struct RunResult {
  std::vector<StepLog> steps;
  std::optional<double> lifetime;
  bool tube_empty = false;
};

inline RunResult run_scenario(const WorldConfig& cfg, Scenario sc, std::uint64_t master, std::uint64_t run,
                              bool validate = true) {
  if (sc.gap_at_target) {
    Scenario ps = sc;
    ps.gap.reset();
    ps.gap_at_target = false;
    World probe = make_world(cfg, ps, master, run, validate);
    if (!probe.targets.empty())
      sc.gap = GapSpec{target_position_at(std::move(probe), sc.gap_time), sc.gap ? sc.gap->radius : 0.0};
  }
  World w = make_world(cfg, sc, master, run, validate);
  RunResult out;
  out.tube_empty = sc.tube_radius > 0.0 && w.tube.empty();
  for (int s = 0; s < sc.steps; ++s) {
    out.steps.push_back(run_step(w));
    if (sc.stop_when_tube_dead && !w.tube.empty()) {
      bool all_dead = true;
      for (NodeId id : w.tube) all_dead &= !w.nodes[id].alive;
      if (all_dead) break;
    }
  }
  if (sc.record_energy && !w.tube.empty()) out.lifetime = network_lifetime(w.trace, w.tube, cfg.eta);
  return out;
}

}  // namespace poser
