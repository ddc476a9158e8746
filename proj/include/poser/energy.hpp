#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "poser/config.hpp"
#include "poser/types.hpp"

namespace poser {

enum class Device : std::size_t { lps = 0, hps, dpu, tx, rx, clock };
inline constexpr std::size_t kDeviceCount = 6;

struct DeviceFlags {
  bool lps = false, hps = false, dpu = false, tx = false, rx = false, clock = false;
  int n_tx = 0;
  double hps_range = 0.0;
};

// Clock and DPU run in every state.
inline DeviceFlags flags_for_mode(NodeMode mode, int n_tx, double hps_range) {
  DeviceFlags f;
  f.clock = true;
  f.dpu = true;
  f.n_tx = n_tx;
  f.hps_range = hps_range;
  switch (mode) {
    case NodeMode::sleep:
      break;
    case NodeMode::lps:
      f.tx = f.rx = f.lps = true;
      break;
    case NodeMode::hps:
      f.tx = f.rx = f.hps = true;
      break;
  }
  return f;
}

inline std::array<double, kDeviceCount> device_energy(const DeviceFlags& f, const WorldConfig& cfg, double dt) {
  if (f.n_tx < 0) throw std::invalid_argument("step_energy: negative n_TX");
  if (!(dt > 0.0)) throw std::invalid_argument("step_energy: dt must be positive");
  std::array<double, kDeviceCount> e{};
  if (f.lps) e[static_cast<std::size_t>(Device::lps)] = cfg.e_lps * dt;
  if (f.hps) e[static_cast<std::size_t>(Device::hps)] = cfg.w_hps * f.hps_range * dt;
  if (f.dpu) e[static_cast<std::size_t>(Device::dpu)] = cfg.e_dpu * dt;
  if (f.tx) e[static_cast<std::size_t>(Device::tx)] = f.n_tx * cfg.e_tx * dt;
  if (f.rx) e[static_cast<std::size_t>(Device::rx)] = cfg.e_rx * dt;
  if (f.clock) e[static_cast<std::size_t>(Device::clock)] = cfg.e_clock * dt;
  return e;
}

inline double step_energy(const DeviceFlags& f, const WorldConfig& cfg, double dt) {
  double s = 0.0;
  for (double v : device_energy(f, cfg, dt)) s += v;
  return s;
}

struct EnergyLedger {
  double e0 = 0.0;
  double consumed_total = 0.0;
  std::array<double, kDeviceCount> per_device{};

  bool dead() const { return consumed_total >= e0; }
  double remaining_fraction() const {
    if (e0 <= 0.0) return 0.0;
    return std::clamp(1.0 - consumed_total / e0, 0.0, 1.0);
  }
};

inline void charge(EnergyLedger& l, Device d, double joules) {
  if (joules < 0.0) throw std::invalid_argument("charge: negative energy");
  l.per_device[static_cast<std::size_t>(d)] += joules;
  l.consumed_total += joules;
}

inline void charge(EnergyLedger& l, const std::array<double, kDeviceCount>& e) {
  for (std::size_t i = 0; i < kDeviceCount; ++i) charge(l, static_cast<Device>(i), e[i]);
}

// Per-step cumulative consumption, one row per step, one column per node.
struct EnergyTrace {
  std::vector<double> time;
  std::vector<std::vector<double>> consumed;
  std::vector<double> e0;
};

// Earliest time at which the tube's consumed fraction reaches eta; empty when the
// horizon ends first.
inline std::optional<double> network_lifetime(const EnergyTrace& trace, const std::vector<NodeId>& tube, double eta) {
  if (tube.empty()) throw std::invalid_argument("network_lifetime: empty tube");
  double total = 0.0;
  for (NodeId id : tube) total += trace.e0.at(id);
  for (std::size_t k = 0; k < trace.time.size(); ++k) {
    double used = 0.0;
    for (NodeId id : tube) used += std::min(trace.consumed[k].at(id), trace.e0[id]);
    const double frac = total > 0.0 ? used / total : 1.0;
    if (frac >= eta - 1e-12) return trace.time[k];
  }
  return std::nullopt;
}

inline double point_segment_distance(Point2D p, Point2D a, Point2D b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

inline std::vector<NodeId> tube_membership(const std::vector<Point2D>& nodes, const std::vector<Point2D>& polyline,
                                           double radius) {
  if (polyline.size() < 2) throw std::invalid_argument("tube_membership: polyline needs two points");
  bool nonzero = false;
  for (std::size_t i = 1; i < polyline.size(); ++i) nonzero |= distance(polyline[i], polyline[i - 1]) > 0.0;
  if (!nonzero) throw std::invalid_argument("tube_membership: degenerate polyline");
  std::vector<NodeId> out;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < polyline.size(); ++i)
      best = std::min(best, point_segment_distance(nodes[n], polyline[i - 1], polyline[i]));
    if (best <= radius) out.push_back(static_cast<NodeId>(n));
  }
  return out;
}

}  // namespace poser
