#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "d2dplan/geometry.hpp"

namespace d2dplan {

// A single-user planning instance: where the user starts, where it must end
// up, how fast it may move per slot, and the per-slot readings of the peer
// and (possibly drifting) destination. Streams are slot-indexed from 1 and
// must cover the whole horizon horizon_T + excess_delay.
struct Scenario {
  Vec2 start;
  std::vector<Vec2> dest_stream;
  std::vector<Vec2> peer_stream;
  double speed = 1.0;  // per-slot step bound
  int horizon_T = 1;
  int excess_delay = 0;
  NormKind norm = NormKind::Euclidean;
  // Diameter of the region holding every stream point and the start; used by
  // the assumption checks. Computed on demand when not set.
  std::optional<double> region_diameter_R;

  int horizon() const { return horizon_T + excess_delay; }

  Vec2 dest_at(int t) const {
    if (t < 1 || t > static_cast<int>(dest_stream.size()))
      throw std::invalid_argument("Scenario: destination slot out of range");
    return dest_stream[static_cast<std::size_t>(t - 1)];
  }
  Vec2 peer_at(int t) const {
    if (t < 1 || t > static_cast<int>(peer_stream.size()))
      throw std::invalid_argument("Scenario: peer slot out of range");
    return peer_stream[static_cast<std::size_t>(t - 1)];
  }

  void validate() const {
    if (!(speed > 0.0)) throw std::invalid_argument("Scenario: speed must be positive");
    if (horizon_T < 1) throw std::invalid_argument("Scenario: horizon_T must be >= 1");
    if (excess_delay < 0) throw std::invalid_argument("Scenario: excess_delay must be >= 0");
    const int n = horizon();
    if (static_cast<int>(dest_stream.size()) < n)
      throw std::invalid_argument("Scenario: destination stream shorter than horizon");
    if (static_cast<int>(peer_stream.size()) < n)
      throw std::invalid_argument("Scenario: peer stream shorter than horizon");
    if (region_diameter_R && !(*region_diameter_R >= 0.0))
      throw std::invalid_argument("Scenario: region diameter must be nonnegative");
  }
};

inline double max_pairwise_distance(const std::vector<Vec2>& pts) {
  double m = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      m = std::max(m, norm2(pts[i] - pts[j]));
  return m;
}

// Diameter of the point set {start} + destination stream + peer stream over
// the horizon. Every leading-path point and every iterate the planners emit
// stays inside the convex hull of this set.
inline double compute_region_diameter(const Scenario& sc) {
  std::vector<Vec2> pts;
  const std::size_t n = static_cast<std::size_t>(sc.horizon());
  pts.reserve(1 + 2 * n);
  pts.push_back(sc.start);
  for (std::size_t i = 0; i < n && i < sc.dest_stream.size(); ++i) pts.push_back(sc.dest_stream[i]);
  for (std::size_t i = 0; i < n && i < sc.peer_stream.size(); ++i) pts.push_back(sc.peer_stream[i]);
  return max_pairwise_distance(pts);
}

inline double region_diameter(const Scenario& sc) {
  return sc.region_diameter_R ? *sc.region_diameter_R : compute_region_diameter(sc);
}

}  // namespace d2dplan
