#pragma once

#include <stdexcept>
#include <string>

#include "d2dplan/geometry.hpp"
#include "d2dplan/sim/scenario_file.hpp"

// Bundled scenario presets. Coordinates are in metres, speeds in metres per
// slot. Each preset fixes a rate_distance_scale_units constant calibrated by
// tools/calibrate.cpp so the preset's direct-path walk lands on a reference
// Mbps anchor; absolute rates are only meaningful relative to that
// calibration, orderings and ratios are what the model pins down.

namespace d2dplan::sim {

// Calibration constants (frozen from tools/calibrate.cpp output; rerun that
// tool after changing preset geometry or the rate model). fig1/fig3 anchor
// the direct-path rate at 1.1 Mbps; fig4/fig5 keep the RateModel default,
// which anchors the fig4 direct walk at 3.1 Mbps.
inline constexpr double kFig1DistanceScale = 111.39820323742124;
inline constexpr double kFig3DistanceScale = kFig1DistanceScale;
inline const double kFig4DistanceScale = RateModel{}.distance_scale;
inline const double kFig5DistanceScale = kFig4DistanceScale;

// Two cooperative pedestrians crossing a plaza: equal-length direct paths
// that run parallel 400*sqrt(2) m apart. The per-slot speed makes the direct
// path exactly fill the 24-slot horizon, so delta = 0 admits only the direct
// path.
inline ScenarioFile preset_fig1() {
  ScenarioFile f;
  f.start = {0, 400};
  f.dest = {400, 1200};
  f.horizon_slots = 24;
  f.excess_delay_slots = 0;
  f.speed = distance(f.start, f.dest) / 23.0;
  f.second = SecondUser{{400, 0}, {800, 800}, f.speed, 24, 0};
  f.loss = LossKind::Squared;
  f.rate.distance_scale = kFig1DistanceScale;
  f.slot_duration_s = 900.0 / 24.0;
  return f;
}

// Shared start, diverging destinations: the optimal pair walks together
// before splitting. Slot length is set by a 40 m/slot pace and each user's
// horizon is its own direct-path travel time at that pace.
inline ScenarioFile preset_fig3() {
  ScenarioFile f;
  f.start = {80, 80};
  f.dest = {-400, 480};
  f.speed = 40.0;
  f.horizon_slots = travel_time(f.start, f.dest, f.speed) + 1;
  f.excess_delay_slots = 2;
  const Vec2 second_dest{600, 600};
  f.second = SecondUser{{80, 80}, second_dest, f.speed,
                        travel_time({80, 80}, second_dest, f.speed) + 1, 2};
  f.loss = LossKind::Squared;
  f.rate.distance_scale = kFig3DistanceScale;
  f.slot_duration_s = 40.0;
  return f;
}

// One planned user against a slowly drifting exogenous peer; the direct path
// exactly fills the 24-slot horizon. Used for the receding-horizon vs
// full-information comparison, so the loss is the squared gap.
inline ScenarioFile preset_fig4() {
  ScenarioFile f;
  f.start = {0, 0};
  f.dest = {150, 300};
  f.horizon_slots = 24;
  f.excess_delay_slots = 1;
  f.speed = distance(f.start, f.dest) / 23.0;
  f.peer = LinearPeer{{160, 120}, {-1.0, 1.5}};
  f.loss = LossKind::Squared;
  f.rate.distance_scale = kFig4DistanceScale;
  f.slot_duration_s = 360.0 / 24.0;
  return f;
}

// Same geometry as preset_fig4 but tuned for the online planner: Huber loss
// with a small strong-convexity modulus and the knee at the speed cap, step
// size from min_gamma, and the lead sliding from the peer to the destination
// across the horizon.
inline ScenarioFile preset_fig5() {
  ScenarioFile f = preset_fig4();
  f.excess_delay_slots = 4;
  f.loss = LossKind::Huber;
  f.huber_mu = 1e-3;
  f.gamma_mode = GammaMode::Auto;
  f.lambda = LambdaSpecKind::LinearDown;
  f.rate.distance_scale = kFig5DistanceScale;
  return f;
}

inline ScenarioFile preset(const std::string& name) {
  if (name == "fig1") return preset_fig1();
  if (name == "fig3") return preset_fig3();
  if (name == "fig4") return preset_fig4();
  if (name == "fig5") return preset_fig5();
  throw std::invalid_argument("preset: unknown preset '" + name +
                              "' (expected fig1, fig3, fig4, or fig5)");
}

}  // namespace d2dplan::sim
