#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "d2dplan/geometry.hpp"

// Per-slot tracking losses and the leading-path construction.
//
// Two loss families are supported, both radial in the gap w = x - lead:
//
//   Squared:  f(x) = |w|^2                (strong convexity 2, gradient Lipschitz 2)
//   Huber:    f(x) = g(|w|) with
//             g(d) = d^2 / 2                                  for d <= v
//             g(d) = v (1 - mu) d + (mu / 2) d^2 - C          for d >  v
//
// with C = (1 - mu) v^2 / 2, the unique constant that makes g continuous at
// the knee d = v (both branches meet at v^2 / 2 with matching slope v).
// The Huber gradient has the equivalent closed form
//   grad f = mu w + (1 - mu) P_v(w)
// where P_v is the Euclidean projection onto the radius-v ball, so a unit
// gradient step can never move more than mu |w| + (1 - mu) v.

namespace d2dplan {

// Euclidean projection onto the origin-centred ball of the given radius.
inline Vec2 project_ball(Vec2 w, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_ball: radius must be positive");
  const double n = norm2(w);
  if (n <= radius) return w;
  return (radius / n) * w;
}

inline double huber_value(double mu, double v, double d) {
  if (!(mu > 0.0) || !(mu < 1.0)) throw std::invalid_argument("huber_value: mu must lie in (0,1)");
  if (!(v > 0.0)) throw std::invalid_argument("huber_value: knee must be positive");
  if (d < 0.0) throw std::invalid_argument("huber_value: distance must be nonnegative");
  if (d <= v) return 0.5 * d * d;
  return v * (1.0 - mu) * d + 0.5 * mu * d * d - 0.5 * (1.0 - mu) * v * v;
}

enum class LossKind { Squared, Huber };

struct LossSpec {
  LossKind kind = LossKind::Squared;
  double mu = 2.0;  // strong-convexity modulus; fixed at 2 for Squared
  double v = 1.0;   // Huber knee radius; planners set it to the speed cap

  static LossSpec squared() { return LossSpec{LossKind::Squared, 2.0, 1.0}; }

  static LossSpec huber(double mu, double v) {
    if (!(mu > 0.0) || !(mu < 1.0)) throw std::invalid_argument("LossSpec: Huber mu must lie in (0,1)");
    if (!(v > 0.0)) throw std::invalid_argument("LossSpec: Huber knee must be positive");
    return LossSpec{LossKind::Huber, mu, v};
  }

  double strong_convexity() const { return kind == LossKind::Squared ? 2.0 : mu; }
  double lipschitz() const { return kind == LossKind::Squared ? 2.0 : 1.0; }

  // Bound on |grad f| over a region of diameter R containing x and the lead.
  double grad_bound(double R) const {
    if (!(R >= 0.0)) throw std::invalid_argument("LossSpec: region diameter must be nonnegative");
    if (kind == LossKind::Squared) return 2.0 * R;
    return mu * R + v * (1.0 - mu);
  }

  double value(double d) const {
    if (d < 0.0) throw std::invalid_argument("LossSpec: distance must be nonnegative");
    if (kind == LossKind::Squared) return d * d;
    return huber_value(mu, v, d);
  }

  double value_at(Vec2 x, Vec2 lead) const { return value(norm2(x - lead)); }
};

inline Vec2 loss_grad(const LossSpec& spec, Vec2 x, Vec2 lead) {
  const Vec2 w = x - lead;
  if (spec.kind == LossKind::Squared) return 2.0 * w;
  return spec.mu * w + (1.0 - spec.mu) * project_ball(w, spec.v);
}

enum class LambdaKind { LinearDown, LinearUp, Custom };

// Per-slot mixing weight for the leading path. LinearDown runs 1 - t/T'
// (start by shadowing the peer, finish on the destination); LinearUp runs
// t/T'; Custom supplies explicit values.
struct LambdaSchedule {
  LambdaKind kind = LambdaKind::LinearDown;
  int horizon = 1;
  std::vector<double> custom;

  static LambdaSchedule linear_down(int horizon) {
    if (horizon < 1) throw std::invalid_argument("LambdaSchedule: horizon must be >= 1");
    return {LambdaKind::LinearDown, horizon, {}};
  }
  static LambdaSchedule linear_up(int horizon) {
    if (horizon < 1) throw std::invalid_argument("LambdaSchedule: horizon must be >= 1");
    return {LambdaKind::LinearUp, horizon, {}};
  }
  static LambdaSchedule custom_values(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("LambdaSchedule: no custom values");
    for (double l : values) {
      if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("LambdaSchedule: values must lie in [0,1]");
    }
    const int n = static_cast<int>(values.size());
    return {LambdaKind::Custom, n, std::move(values)};
  }
};

inline double lambda_at(const LambdaSchedule& schedule, int t) {
  if (t < 1 || t > schedule.horizon) throw std::invalid_argument("lambda_at: slot out of range");
  const double u = static_cast<double>(t) / static_cast<double>(schedule.horizon);
  switch (schedule.kind) {
    case LambdaKind::LinearDown: return 1.0 - u;
    case LambdaKind::LinearUp: return u;
    case LambdaKind::Custom: return schedule.custom[static_cast<std::size_t>(t - 1)];
  }
  throw std::logic_error("lambda_at: unknown schedule kind");
}

// Convex mix of the peer position and the destination.
inline Vec2 leading_path(double lambda, Vec2 peer, Vec2 dest) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("leading_path: lambda must lie in [0,1]");
  return lambda * peer + (1.0 - lambda) * dest;
}

}  // namespace d2dplan
