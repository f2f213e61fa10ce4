#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Planar primitives shared by every planner: points, norms, trajectories.

namespace d2dplan {

enum class NormKind { Euclidean, Manhattan };

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline Vec2& operator+=(Vec2& a, Vec2 b) { a = a + b; return a; }
inline Vec2& operator-=(Vec2& a, Vec2 b) { a = a - b; return a; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2_sq(Vec2 a) { return dot(a, a); }
inline double norm2(Vec2 a) { return std::hypot(a.x, a.y); }
inline double norm1(Vec2 a) { return std::abs(a.x) + std::abs(a.y); }

inline double norm(Vec2 a, NormKind kind) {
  return kind == NormKind::Euclidean ? norm2(a) : norm1(a);
}

inline double distance(Vec2 a, Vec2 b, NormKind kind = NormKind::Euclidean) {
  return norm(a - b, kind);
}

// Slot-indexed position sequence. Slot t is 1-based in all documentation;
// points[t - 1] is the position held during slot t.
struct Trajectory {
  std::vector<Vec2> points;

  Trajectory() = default;
  explicit Trajectory(std::vector<Vec2> pts) : points(std::move(pts)) {}

  int size() const { return static_cast<int>(points.size()); }
  bool empty() const { return points.empty(); }
  Vec2& operator[](std::size_t i) { return points[i]; }
  const Vec2& operator[](std::size_t i) const { return points[i]; }
  Vec2 front() const { return points.front(); }
  Vec2 back() const { return points.back(); }
  // 1-based slot access.
  Vec2 at_slot(int t) const {
    if (t < 1 || t > size()) throw std::invalid_argument("Trajectory: slot out of range");
    return points[static_cast<std::size_t>(t - 1)];
  }
};

// Number of whole slots needed to cover start->dest at per-slot speed v.
// Zero when the endpoints coincide. The tiny relative guard keeps exact
// multiples of v from rounding up to an extra slot.
inline int travel_time(Vec2 start, Vec2 dest, double v,
                       NormKind kind = NormKind::Euclidean) {
  if (!(v > 0.0)) throw std::invalid_argument("travel_time: speed must be positive");
  const double d = distance(start, dest, kind);
  if (d == 0.0) return 0;
  return static_cast<int>(std::ceil((d / v) * (1.0 - 1e-12)));
}

// Evenly spaced walk of n_slots points from start to dest (inclusive).
inline Trajectory direct_path(Vec2 start, Vec2 dest, int n_slots) {
  if (n_slots < 1) throw std::invalid_argument("direct_path: n_slots must be >= 1");
  Trajectory out;
  out.points.reserve(static_cast<std::size_t>(n_slots));
  if (n_slots == 1) {
    out.points.push_back(start);
    return out;
  }
  const Vec2 span = dest - start;
  for (int i = 0; i < n_slots; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n_slots - 1);
    out.points.push_back(start + u * span);
  }
  out.points.back() = dest;  // exact endpoint, no rounding residue
  return out;
}

// True when every consecutive step is within v, up to a relative tolerance.
inline bool check_velocity_feasible(const Trajectory& traj, double v,
                                    NormKind kind = NormKind::Euclidean,
                                    double rel_tol = 1e-6) {
  if (!(v > 0.0)) throw std::invalid_argument("check_velocity_feasible: speed must be positive");
  const double cap = v * (1.0 + rel_tol);
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    if (distance(traj.points[i], traj.points[i - 1], kind) > cap) return false;
  }
  return true;
}

inline double max_step_length(const Trajectory& traj, NormKind kind = NormKind::Euclidean) {
  double m = 0.0;
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    m = std::max(m, distance(traj.points[i], traj.points[i - 1], kind));
  }
  return m;
}

inline double distance_to_destination(const Trajectory& traj, Vec2 dest,
                                      NormKind kind = NormKind::Euclidean) {
  if (traj.empty()) throw std::invalid_argument("distance_to_destination: empty trajectory");
  return distance(traj.back(), dest, kind);
}

}  // namespace d2dplan
