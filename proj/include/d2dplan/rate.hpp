#pragma once

#include <cmath>
#include <stdexcept>

#include "d2dplan/geometry.hpp"

// Link-rate model for the device-to-device channel. Received signal strength
// follows a pure power-law decay in the scaled distance, the SNR utility is
// the bounded ratio rss / (sigma2 + rss), and the spectral rate is
// bandwidth * log2(1 + snr), which keeps the rate strictly below the
// bandwidth because the utility stays below one.

namespace d2dplan {

struct RateModel {
  double bandwidth_hz = 1e7;
  double alpha = 2.5;   // path-loss exponent
  double sigma2 = 0.2;  // noise power
  // Length units mapped to one unit of path-loss distance. The default is
  // calibrated so the bundled fig4 preset's direct walk averages 3.1 Mbps;
  // regenerate with tools/calibrate if the preset geometry changes.
  double distance_scale = 34.234392650752312;

  void validate() const {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("RateModel: bandwidth must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("RateModel: alpha must be positive");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("RateModel: sigma2 must be positive");
    if (!(distance_scale > 0.0)) throw std::invalid_argument("RateModel: distance_scale must be positive");
  }
};

inline double utility_rss(double dist, double alpha) {
  if (!(dist > 0.0)) throw std::invalid_argument("utility_rss: distance must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("utility_rss: alpha must be positive");
  return std::pow(dist, -alpha);
}

inline double utility_snr(double dist, const RateModel& model) {
  model.validate();
  const double rss = utility_rss(dist / model.distance_scale, model.alpha);
  return rss / (model.sigma2 + rss);
}

inline double rate(double dist, const RateModel& model) {
  return model.bandwidth_hz * std::log2(1.0 + utility_snr(dist, model));
}

struct RateSummary {
  double average_bps = 0.0;
  double downloaded_bits = 0.0;
};

// Mean per-slot rate between two position sequences, over the slots both
// cover. Distances of zero propagate as errors; callers that need a floor
// clamp before calling.
inline RateSummary average_rate(const Trajectory& a, const Trajectory& b,
                                const RateModel& model, double slot_duration_s = 1.0) {
  if (a.empty() || b.empty()) throw std::invalid_argument("average_rate: empty trajectory");
  if (!(slot_duration_s > 0.0)) throw std::invalid_argument("average_rate: slot duration must be positive");
  const int n = std::min(a.size(), b.size());
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += rate(distance(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)]), model);
  }
  return {sum / n, sum * slot_duration_s};
}

}  // namespace d2dplan
