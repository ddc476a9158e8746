#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

namespace poser {

using NodeId = std::uint32_t;

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2D&, const Point2D&) = default;
};

inline double distance(Point2D a, Point2D b) { return std::hypot(a.x - b.x, a.y - b.y); }

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat25 = Eigen::Matrix<double, 2, 5>;
using Mat52 = Eigen::Matrix<double, 5, 2>;

// State layout (x, vx, y, vy, psi).
inline constexpr int kX = 0;
inline constexpr int kVx = 1;
inline constexpr int kY = 2;
inline constexpr int kVy = 3;
inline constexpr int kPsi = 4;

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double d) { return d * kPi / 180.0; }

// Wrap to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

inline Point2D position_of(const Vec5& s) { return {s(kX), s(kY)}; }

inline Mat2 position_cov(const Mat5& p) {
  Mat2 c;
  c << p(kX, kX), p(kX, kY), p(kY, kX), p(kY, kY);
  return c;
}

inline void symmetrize(Mat5& p) { p = 0.5 * (p + p.transpose()).eval(); }

enum class NodeMode : std::uint8_t { sleep = 0, lps = 1, hps = 2 };

}  // namespace poser
