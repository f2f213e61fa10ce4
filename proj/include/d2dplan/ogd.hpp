#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <variant>

#include "d2dplan/geometry.hpp"
#include "d2dplan/losses.hpp"
#include "d2dplan/scenario.hpp"

// Online planner. Each slot takes one projected-gradient step of the current
// tracking loss at step size 1/gamma:
//
//   x(t+1) = x(t) - (1/gamma) grad f_t(x(t))
//
// For the Huber loss the step expands to
//
//   x - (mu/gamma) (x - lead) - ((1 - mu)/gamma) P_v(x - lead)
//
// so with gamma large enough (gamma >= G/v, assumption A3) a step never
// exceeds the speed cap. The runner additionally caps each realised step to
// the speed ball, a no-op whenever A3 holds, so emitted trajectories are
// always feasible even for configs that only approximately satisfy A3.

namespace d2dplan {

struct BoxRegion {
  Vec2 lo;
  Vec2 hi;
  Vec2 project(Vec2 p) const {
    return {std::min(std::max(p.x, lo.x), hi.x), std::min(std::max(p.y, lo.y), hi.y)};
  }
};

struct DiskRegion {
  Vec2 center;
  double radius = 1.0;
  Vec2 project(Vec2 p) const {
    const Vec2 w = p - center;
    const double n = norm2(w);
    if (n <= radius) return p;
    return center + (radius / n) * w;
  }
};

using RegionSpec = std::variant<std::monostate, BoxRegion, DiskRegion>;

inline Vec2 project_region(const RegionSpec& region, Vec2 p) {
  if (std::holds_alternative<BoxRegion>(region)) return std::get<BoxRegion>(region).project(p);
  if (std::holds_alternative<DiskRegion>(region)) return std::get<DiskRegion>(region).project(p);
  return p;
}

struct OgdConfig {
  double gamma = 1.0;
  LossSpec loss = LossSpec::huber(1e-3, 1.0);
  LambdaSchedule schedule = LambdaSchedule::linear_down(1);
  RegionSpec region;  // optional convex region, projected onto after each step

  void validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("OgdConfig: gamma must be positive");
  }
};

// Smallest gamma that satisfies both the theorem hypothesis (gamma >= L,
// with L = 1 for the Huber family) and the sufficient step-bound condition
// gamma >= 1 + mu R / v >= G / v.
inline double min_gamma(double mu, double region_diameter, double v) {
  if (!(mu > 0.0)) throw std::invalid_argument("min_gamma: mu must be positive");
  if (!(region_diameter >= 0.0)) throw std::invalid_argument("min_gamma: region diameter must be nonnegative");
  if (!(v > 0.0)) throw std::invalid_argument("min_gamma: speed must be positive");
  return std::max(1.0, 1.0 + mu * region_diameter / v);
}

struct AssumptionReport {
  bool a1_strongly_convex = false;
  bool a2_gradient_bounded = false;
  bool a3_step_within_speed = false;
  bool gamma_at_least_lipschitz = false;
  double mu = 0.0;
  double lipschitz = 0.0;
  double grad_bound = 0.0;
  double gamma = 0.0;
  double gamma_required_for_a3 = 0.0;  // exact G / v
  double region_diameter = 0.0;
  double speed = 0.0;

  bool all_satisfied() const {
    return a1_strongly_convex && a2_gradient_bounded && a3_step_within_speed &&
           gamma_at_least_lipschitz;
  }
};

inline AssumptionReport verify_assumptions(const OgdConfig& cfg, double region_diameter,
                                           double speed) {
  cfg.validate();
  if (!(region_diameter >= 0.0))
    throw std::invalid_argument("verify_assumptions: region diameter must be nonnegative");
  if (!(speed > 0.0)) throw std::invalid_argument("verify_assumptions: speed must be positive");

  AssumptionReport r;
  r.mu = cfg.loss.strong_convexity();
  r.lipschitz = cfg.loss.lipschitz();
  r.grad_bound = cfg.loss.grad_bound(region_diameter);
  r.gamma = cfg.gamma;
  r.gamma_required_for_a3 = r.grad_bound / speed;
  r.region_diameter = region_diameter;
  r.speed = speed;
  r.a1_strongly_convex = r.mu > 0.0;
  r.a2_gradient_bounded = std::isfinite(r.lipschitz) && std::isfinite(r.grad_bound);
  r.a3_step_within_speed = cfg.gamma >= r.gamma_required_for_a3;
  r.gamma_at_least_lipschitz = cfg.gamma >= r.lipschitz;
  return r;
}

// One online update. Pure form; the step can exceed the speed cap when gamma
// is too small for A3 (the runner caps realised steps, this function does not).
inline Vec2 ogd_step(Vec2 x, Vec2 lead, const LossSpec& loss, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("ogd_step: gamma must be positive");
  return x - (1.0 / gamma) * loss_grad(loss, x, lead);
}

// Play the whole horizon. Slot-t readings build the lead; the realised step
// is capped to the speed ball and then projected onto the configured region.
inline Trajectory ogd_run(const Scenario& sc, const OgdConfig& cfg) {
  sc.validate();
  cfg.validate();
  if (sc.norm != NormKind::Euclidean)
    throw std::invalid_argument("ogd_run: only Euclidean scenarios are supported");
  const int horizon = sc.horizon();
  if (cfg.schedule.horizon != horizon)
    throw std::invalid_argument("ogd_run: schedule horizon does not match the scenario");

  Trajectory traj;
  traj.points.reserve(static_cast<std::size_t>(horizon));
  Vec2 x = project_region(cfg.region, sc.start);
  traj.points.push_back(x);
  for (int t = 1; t < horizon; ++t) {
    const Vec2 lead = leading_path(lambda_at(cfg.schedule, t), sc.peer_at(t), sc.dest_at(t));
    Vec2 next = ogd_step(x, lead, cfg.loss, cfg.gamma);
    const Vec2 step = next - x;
    const double len = norm2(step);
    if (len > sc.speed) next = x + (sc.speed / len) * step;  // physical speed cap
    next = project_region(cfg.region, next);
    traj.points.push_back(next);
    x = next;
  }
  return traj;
}

}  // namespace d2dplan
