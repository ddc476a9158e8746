#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "poser/config.hpp"
#include "poser/rng.hpp"
#include "poser/types.hpp"

namespace poser {

inline int deployment_size(const WorldConfig& cfg) {
  if (cfg.node_count >= 0) return cfg.node_count;
  return static_cast<int>(std::ceil(cfg.density * cfg.region_width * cfg.region_height - 1e-9));
}

// Positions in id order, drawn from the run's deployment stream.
inline std::vector<Point2D> uniform_deployment(const WorldConfig& cfg, std::uint64_t master, std::uint64_t run) {
  if (!(cfg.region_width > 0.0 && cfg.region_height > 0.0))
    throw std::invalid_argument("uniform_deployment: zero-area region");
  RngStream dep(derive_seed(master, {run, static_cast<std::uint64_t>(StreamTag::deployment)}));
  std::vector<Point2D> out;
  const int n = deployment_size(cfg);
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) {
    const double x = dep.uniform(0.0, cfg.region_width);
    const double y = dep.uniform(0.0, cfg.region_height);
    out.push_back({x, y});
  }
  return out;
}

inline std::vector<NodeId> neighborhood(NodeId id, const std::vector<Point2D>& pos, double r_c) {
  std::vector<NodeId> out;
  for (std::size_t j = 0; j < pos.size(); ++j)
    if (j != id && distance(pos[j], pos[id]) <= r_c) out.push_back(static_cast<NodeId>(j));
  return out;
}

}  // namespace poser
