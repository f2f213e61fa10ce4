#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "d2dplan/geometry.hpp"
#include "d2dplan/losses.hpp"

// Offline trajectory solvers.
//
// Every problem here is a convex program over one or two position chains:
// minimise a per-slot tracking (or pair-gap) loss subject to pinned slots and
// a per-step speed bound. The solver is projected gradient descent with a
// fixed 1/L step, FISTA-style momentum, and monotone fallback. The feasible
// set, an intersection of per-step balls with some coordinates pinned, is
// projected onto with Dykstra's cyclic scheme; a plain cyclic-projection
// polish afterwards drives constraint violations to well below the reported
// feasibility tolerance.
//
// Convergence is declared on the projected-gradient residual
//   r(x) = | x - P( x - (1/L) grad F(x) ) |
// which vanishes exactly at constrained stationary points.

namespace d2dplan {

class UnreachableDestinationError : public std::runtime_error {
 public:
  UnreachableDestinationError(int slot, double needed, double budget)
      : std::runtime_error("unreachable pin at slot " + std::to_string(slot) +
                           ": requires " + std::to_string(needed) +
                           " of travel but only " + std::to_string(budget) + " is reachable"),
        slot_(slot) {}
  int slot() const { return slot_; }

 private:
  int slot_ = 0;
};

struct SolveSettings {
  double kkt_tol = 1e-6;
  int max_iterations = 100000;
  // Dykstra sweep-displacement stop, relative to max(1, v).
  double projection_tol = 1e-12;
  int max_projection_sweeps = 20000;
  // Post-projection polish target on step violations, relative to v.
  double feasibility_tol = 1e-9;
};

struct SolveReport {
  Trajectory trajectory;
  std::optional<Trajectory> trajectory2;  // second user in cooperative solves
  double objective = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
  bool converged = false;
};

namespace detail {

// One chain of n points inside a stacked state, with optional pinned slots.
struct Chain {
  int offset = 0;
  int n = 0;
  double v = 1.0;
  NormKind norm = NormKind::Euclidean;
  std::vector<std::optional<Vec2>> pins;  // size n

  static Chain make(int offset, int n, double v, NormKind norm) {
    if (n < 1) throw std::invalid_argument("Chain: need at least one slot");
    if (!(v > 0.0)) throw std::invalid_argument("Chain: speed must be positive");
    Chain c;
    c.offset = offset;
    c.n = n;
    c.v = v;
    c.norm = norm;
    c.pins.assign(static_cast<std::size_t>(n), std::nullopt);
    return c;
  }

  void pin(int slot0, Vec2 p) {
    if (slot0 < 0 || slot0 >= n) throw std::invalid_argument("Chain: pin slot out of range");
    pins[static_cast<std::size_t>(slot0)] = p;
  }

  // Every gap between consecutive pinned slots must be coverable at speed v.
  // Throws with the 1-based slot of the offending pin.
  void validate_reachable() const {
    int prev = -1;
    for (int i = 0; i < n; ++i) {
      if (!pins[static_cast<std::size_t>(i)]) continue;
      if (prev >= 0) {
        const double need = distance(*pins[static_cast<std::size_t>(prev)],
                                     *pins[static_cast<std::size_t>(i)], norm);
        const double budget = v * (i - prev);
        if (need > budget * (1.0 + 1e-9))
          throw UnreachableDestinationError(i + 1, need, budget);
      }
      prev = i;
    }
  }

  void apply_pins(std::vector<Vec2>& state) const {
    for (int i = 0; i < n; ++i) {
      if (pins[static_cast<std::size_t>(i)])
        state[static_cast<std::size_t>(offset + i)] = *pins[static_cast<std::size_t>(i)];
    }
  }

  // A euclidean segment whose end pins leave no slack admits only the straight
  // equal-pace run; pin its interior so the iterative projection, which
  // converges poorly onto such degenerate sets, never has to find it.
  void pin_tight_segments() {
    if (norm != NormKind::Euclidean) return;
    int prev = -1;
    for (int i = 0; i < n; ++i) {
      if (!pins[static_cast<std::size_t>(i)]) continue;
      if (prev >= 0 && i - prev >= 2) {
        const Vec2 a = *pins[static_cast<std::size_t>(prev)];
        const Vec2 b = *pins[static_cast<std::size_t>(i)];
        const double need = distance(a, b, norm);
        const double budget = v * (i - prev);
        if (need >= budget * (1.0 - 1e-9)) {
          for (int k = prev + 1; k < i; ++k) {
            const double f = static_cast<double>(k - prev) / static_cast<double>(i - prev);
            pins[static_cast<std::size_t>(k)] = a + f * (b - a);
          }
        }
      }
      prev = i;
    }
  }
};

// Euclidean projection of a step vector onto the speed ball of the chain norm.
inline Vec2 project_step(Vec2 w, double v, NormKind norm) {
  if (norm == NormKind::Euclidean) {
    const double n = norm2(w);
    if (n <= v) return w;
    return (v / n) * w;
  }
  // l1 ball (diamond): soft-shrink both coordinates, clamping to an axis when
  // the shrink would cross it.
  double px = std::abs(w.x), py = std::abs(w.y);
  if (px + py <= v) return w;
  const double theta = 0.5 * (px + py - v);
  double qx, qy;
  if (px - theta >= 0.0 && py - theta >= 0.0) {
    qx = px - theta;
    qy = py - theta;
  } else if (px - theta < 0.0) {
    qx = 0.0;
    qy = std::min(py, v);
  } else {
    qx = std::min(px, v);
    qy = 0.0;
  }
  return {std::copysign(qx, w.x), std::copysign(qy, w.y)};
}

// Project the pair (a, b) onto { |b - a| <= v }, moving only free endpoints.
inline void project_pair(Vec2& a, Vec2& b, bool a_pinned, bool b_pinned, double v, NormKind norm) {
  const Vec2 d = b - a;
  if (d2dplan::norm(d, norm) <= v) return;
  if (a_pinned && b_pinned) return;  // validated reachable up front
  if (a_pinned) {
    b = a + project_step(d, v, norm);
    return;
  }
  if (b_pinned) {
    a = b + project_step(-1.0 * d, v, norm);
    return;
  }
  const Vec2 d2 = project_step(d, v, norm);
  const Vec2 m = 0.5 * (a + b);
  a = m - 0.5 * d2;
  b = m + 0.5 * d2;
}

// Dykstra cyclic projection of one chain's slice of the stacked state onto
// its feasible set, followed by a cyclic feasibility polish.
inline void project_chain(std::vector<Vec2>& state, const Chain& c, const SolveSettings& st,
                          std::vector<Vec2>& corr /* scratch, 2 per constraint */) {
  c.apply_pins(state);
  if (c.n < 2) return;
  const std::size_t base = static_cast<std::size_t>(c.offset);
  const int m = c.n - 1;

  // Fast path: already feasible.
  double worst = 0.0;
  for (int i = 0; i < m; ++i)
    worst = std::max(worst, distance(state[base + i + 1], state[base + i], c.norm));
  const double feas_cap = c.v * (1.0 + 1e-12);
  if (worst <= feas_cap) return;

  corr.assign(static_cast<std::size_t>(2 * m), Vec2{});
  const double sweep_tol = st.projection_tol * std::max(1.0, c.v);
  for (int sweep = 0; sweep < st.max_projection_sweeps; ++sweep) {
    double moved = 0.0;
    for (int i = 0; i < m; ++i) {
      const bool pa = c.pins[static_cast<std::size_t>(i)].has_value();
      const bool pb = c.pins[static_cast<std::size_t>(i + 1)].has_value();
      if (pa && pb) continue;
      Vec2 a = state[base + i];
      Vec2 b = state[base + i + 1];
      if (!pa) a += corr[static_cast<std::size_t>(2 * i)];
      if (!pb) b += corr[static_cast<std::size_t>(2 * i + 1)];
      Vec2 a2 = a, b2 = b;
      project_pair(a2, b2, pa, pb, c.v, c.norm);
      corr[static_cast<std::size_t>(2 * i)] = pa ? Vec2{} : a - a2;
      corr[static_cast<std::size_t>(2 * i + 1)] = pb ? Vec2{} : b - b2;
      moved = std::max(moved, norm2(a2 - state[base + i]));
      moved = std::max(moved, norm2(b2 - state[base + i + 1]));
      if (!pa) state[base + i] = a2;
      if (!pb) state[base + i + 1] = b2;
    }
    if (moved <= sweep_tol) break;
  }

  // Polish: plain cyclic projections until every step fits the bound.
  const double polish_cap = c.v * (1.0 + st.feasibility_tol);
  for (int sweep = 0; sweep < 512; ++sweep) {
    double bad = 0.0;
    for (int i = 0; i < m; ++i) {
      const bool pa = c.pins[static_cast<std::size_t>(i)].has_value();
      const bool pb = c.pins[static_cast<std::size_t>(i + 1)].has_value();
      if (pa && pb) continue;
      Vec2 a = state[base + i];
      Vec2 b = state[base + i + 1];
      project_pair(a, b, pa, pb, c.v, c.norm);
      state[base + i] = a;
      state[base + i + 1] = b;
    }
    for (int i = 0; i < m; ++i)
      bad = std::max(bad, distance(state[base + i + 1], state[base + i], c.norm));
    if (bad <= polish_cap) break;
  }
}

inline double stacked_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += norm2_sq(a[i] - b[i]);
  return std::sqrt(s);
}

struct CoreResult {
  std::vector<Vec2> state;
  double objective = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
  bool converged = false;
};

// FISTA with monotone fallback over a stacked state. Objective supplies
// value/grad/lipschitz; Projector maps a state onto the feasible set.
template <class Objective, class Projector>
CoreResult fista_minimize(std::vector<Vec2> x, const Objective& obj, const Projector& project,
                          const SolveSettings& st) {
  const double L = obj.lipschitz();
  const double inv_L = 1.0 / L;
  const std::size_t dim = x.size();
  std::vector<Vec2> g(dim), z(dim), w(dim), y, x_prev;

  project(x);
  double fx = obj.value(x);
  y = x;
  x_prev = x;
  double t_mom = 1.0;
  double kkt = std::numeric_limits<double>::infinity();
  int it = 0;
  bool converged = false;

  auto pg_from = [&](const std::vector<Vec2>& p, std::vector<Vec2>& out) {
    obj.grad(p, g);
    out = p;
    for (std::size_t i = 0; i < dim; ++i) out[i] -= inv_L * g[i];
    project(out);
  };

  while (it < st.max_iterations) {
    ++it;
    pg_from(y, z);
    double fz = obj.value(z);
    if (fz > fx + 1e-12 * (1.0 + std::abs(fx))) {
      // Momentum overshot; restart from the best known point.
      y = x;
      t_mom = 1.0;
      pg_from(y, z);
      fz = obj.value(z);
    }
    pg_from(z, w);
    const double fw = obj.value(w);
    kkt = stacked_distance(w, z);
    x_prev.swap(x);
    if (fw <= fz) {
      x = w;
      fx = fw;
    } else {
      x = z;
      fx = fz;
    }
    if (kkt <= st.kkt_tol) {
      converged = true;
      break;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
    const double beta = (t_mom - 1.0) / t_next;
    y = x;
    for (std::size_t i = 0; i < dim; ++i) y[i] += beta * (x[i] - x_prev[i]);
    t_mom = t_next;
  }

  // Residual at the point actually returned.
  pg_from(x, w);
  kkt = stacked_distance(w, x);
  converged = converged || kkt <= st.kkt_tol;

  CoreResult res;
  res.state = std::move(x);
  res.objective = obj.value(res.state);
  res.iterations = it;
  res.kkt_residual = kkt;
  res.converged = converged;
  return res;
}

// Weighted per-slot tracking loss against a fixed lead sequence.
struct TrackingObjective {
  const std::vector<Vec2>* leads = nullptr;
  const std::vector<double>* weights = nullptr;  // null means all ones
  LossSpec loss;

  double lipschitz() const { return loss.lipschitz(); }

  double weight(std::size_t i) const { return weights ? (*weights)[i] : 1.0; }

  double value(const std::vector<Vec2>& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double wi = weight(i);
      if (wi != 0.0) s += wi * loss.value_at(x[i], (*leads)[i]);
    }
    return s;
  }

  void grad(const std::vector<Vec2>& x, std::vector<Vec2>& g) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double wi = weight(i);
      g[i] = wi != 0.0 ? wi * loss_grad(loss, x[i], (*leads)[i]) : Vec2{};
    }
  }
};

// Squared gap between two stacked chains over their joint horizon.
struct PairGapObjective {
  int n1 = 0;
  int joint = 0;  // number of coupled slots

  double lipschitz() const { return 4.0; }

  double value(const std::vector<Vec2>& x) const {
    double s = 0.0;
    for (int t = 0; t < joint; ++t)
      s += norm2_sq(x[static_cast<std::size_t>(t)] - x[static_cast<std::size_t>(n1 + t)]);
    return s;
  }

  void grad(const std::vector<Vec2>& x, std::vector<Vec2>& g) const {
    std::fill(g.begin(), g.end(), Vec2{});
    for (int t = 0; t < joint; ++t) {
      const Vec2 d = x[static_cast<std::size_t>(t)] - x[static_cast<std::size_t>(n1 + t)];
      g[static_cast<std::size_t>(t)] = 2.0 * d;
      g[static_cast<std::size_t>(n1 + t)] = -2.0 * d;
    }
  }
};

}  // namespace detail

// Benchmark problem: minimise the cumulative loss to a known lead sequence,
// starting pinned at `start`, with per-step speed `speed`. No terminal pin.
struct BenchmarkProblem {
  Vec2 start;
  std::vector<Vec2> lead_points;  // slot 1..T'
  double speed = 1.0;
  NormKind norm = NormKind::Euclidean;
  LossSpec loss = LossSpec::squared();

  void validate() const {
    if (lead_points.empty()) throw std::invalid_argument("BenchmarkProblem: no lead points");
    if (!(speed > 0.0)) throw std::invalid_argument("BenchmarkProblem: speed must be positive");
  }
};

// Tracking problem with arbitrary pinned slots (1-based) and optional
// per-slot weights; used for the known-stream offline solve and by the MPC
// planner (prefix pins plus terminal pin).
struct TrackingProblem {
  std::vector<Vec2> leads;
  double speed = 1.0;
  NormKind norm = NormKind::Euclidean;
  LossSpec loss = LossSpec::squared();
  std::vector<std::pair<int, Vec2>> pins;  // (1-based slot, point)
  std::vector<double> weights;             // empty means all ones

  void validate() const {
    if (leads.empty()) throw std::invalid_argument("TrackingProblem: no lead points");
    if (!(speed > 0.0)) throw std::invalid_argument("TrackingProblem: speed must be positive");
    if (!weights.empty() && weights.size() != leads.size())
      throw std::invalid_argument("TrackingProblem: weight/lead size mismatch");
    for (const auto& [slot, p] : pins) {
      (void)p;
      if (slot < 1 || slot > static_cast<int>(leads.size()))
        throw std::invalid_argument("TrackingProblem: pin slot out of range");
    }
  }
};

// Two-user cooperative problem: minimise the summed squared gap over the
// joint horizon, both users pinned at start and destination.
struct CooperativeProblem {
  struct User {
    Vec2 start;
    Vec2 dest;
    int n_slots = 2;   // T + delta points
    double speed = 1.0;
  };
  User a;
  User b;
  NormKind norm = NormKind::Euclidean;

  void validate() const {
    for (const User* u : {&a, &b}) {
      if (u->n_slots < 2) throw std::invalid_argument("CooperativeProblem: need at least two slots");
      if (!(u->speed > 0.0)) throw std::invalid_argument("CooperativeProblem: speed must be positive");
    }
  }
};

namespace detail {

inline detail::Chain tracking_chain(const TrackingProblem& p, int offset) {
  auto c = detail::Chain::make(offset, static_cast<int>(p.leads.size()), p.speed, p.norm);
  for (const auto& [slot, pt] : p.pins) c.pin(slot - 1, pt);
  c.validate_reachable();
  c.pin_tight_segments();
  return c;
}

// Rewrite trajectory slots (from0..n-1] as a max-speed straight run to dest,
// waiting at dest once reached. Caller guarantees reachability.
inline void steer_tail_to_dest(std::vector<Vec2>& pts, std::size_t from0, Vec2 dest, double v,
                               NormKind norm) {
  for (std::size_t i = from0 + 1; i < pts.size(); ++i) {
    const Vec2 cur = pts[i - 1];
    const Vec2 gap = dest - cur;
    const double d = d2dplan::norm(gap, norm);
    const std::size_t steps_left = pts.size() - i;
    if (d <= v) {
      pts[i] = dest;
      continue;
    }
    double step = v;
    // Never fall behind the pace needed to arrive on time.
    const double forced = d - v * static_cast<double>(steps_left - 1);
    if (forced > step) step = std::min(forced, v * (1.0 + 1e-9));
    pts[i] = cur + (step / d) * gap;
  }
  pts.back() = dest;
}

}  // namespace detail

inline SolveReport solve_tracking(const TrackingProblem& p, const SolveSettings& st = {}) {
  p.validate();
  auto chain = detail::tracking_chain(p, 0);

  std::vector<Vec2> corr;
  auto project = [&](std::vector<Vec2>& s) { detail::project_chain(s, chain, st, corr); };
  detail::TrackingObjective obj{&p.leads, p.weights.empty() ? nullptr : &p.weights, p.loss};

  // Warm start on the leads themselves; the projection pulls them feasible.
  std::vector<Vec2> x0 = p.leads;
  auto res = detail::fista_minimize(std::move(x0), obj, project, st);

  SolveReport rep;
  rep.trajectory = Trajectory{std::move(res.state)};
  rep.objective = res.objective;
  rep.iterations = res.iterations;
  rep.kkt_residual = res.kkt_residual;
  rep.converged = res.converged;
  return rep;
}

inline SolveReport solve_benchmark(const BenchmarkProblem& p, const SolveSettings& st = {}) {
  p.validate();
  TrackingProblem t;
  t.leads = p.lead_points;
  t.speed = p.speed;
  t.norm = p.norm;
  t.loss = p.loss;
  t.pins = {{1, p.start}};
  return solve_tracking(t, st);
}

inline SolveReport solve_cooperative(const CooperativeProblem& p, const SolveSettings& st = {}) {
  p.validate();
  const int n1 = p.a.n_slots;
  const int n2 = p.b.n_slots;
  const int joint = std::min(n1, n2);

  auto c1 = detail::Chain::make(0, n1, p.a.speed, p.norm);
  c1.pin(0, p.a.start);
  c1.pin(n1 - 1, p.a.dest);
  c1.validate_reachable();
  c1.pin_tight_segments();
  auto c2 = detail::Chain::make(n1, n2, p.b.speed, p.norm);
  c2.pin(0, p.b.start);
  c2.pin(n2 - 1, p.b.dest);
  c2.validate_reachable();
  c2.pin_tight_segments();

  std::vector<Vec2> corr1, corr2;
  auto project = [&](std::vector<Vec2>& s) {
    detail::project_chain(s, c1, st, corr1);
    detail::project_chain(s, c2, st, corr2);
  };
  detail::PairGapObjective obj{n1, joint};

  std::vector<Vec2> x0;
  x0.reserve(static_cast<std::size_t>(n1 + n2));
  for (const Vec2& v : direct_path(p.a.start, p.a.dest, n1).points) x0.push_back(v);
  for (const Vec2& v : direct_path(p.b.start, p.b.dest, n2).points) x0.push_back(v);

  auto res = detail::fista_minimize(std::move(x0), obj, project, st);

  // The longer user's slots past the joint horizon carry no objective; make
  // them the canonical max-speed straight run to the destination.
  if (n1 > joint) {
    std::vector<Vec2> u1(res.state.begin(), res.state.begin() + n1);
    detail::steer_tail_to_dest(u1, static_cast<std::size_t>(joint - 1), p.a.dest, p.a.speed, p.norm);
    std::copy(u1.begin(), u1.end(), res.state.begin());
  }
  if (n2 > joint) {
    std::vector<Vec2> u2(res.state.begin() + n1, res.state.end());
    detail::steer_tail_to_dest(u2, static_cast<std::size_t>(joint - 1), p.b.dest, p.b.speed, p.norm);
    std::copy(u2.begin(), u2.end(), res.state.begin() + n1);
  }

  SolveReport rep;
  rep.trajectory = Trajectory{std::vector<Vec2>(res.state.begin(), res.state.begin() + n1)};
  rep.trajectory2 = Trajectory{std::vector<Vec2>(res.state.begin() + n1, res.state.end())};
  rep.objective = res.objective;
  rep.iterations = res.iterations;
  rep.kkt_residual = res.kkt_residual;
  rep.converged = res.converged;
  return rep;
}

// Projected-gradient residual of a feasible trajectory for the benchmark
// problem; zero exactly at the constrained optimum.
inline double kkt_residual(const Trajectory& traj, const BenchmarkProblem& p,
                           const SolveSettings& st = {}) {
  p.validate();
  if (traj.size() != static_cast<int>(p.lead_points.size()))
    throw std::invalid_argument("kkt_residual: trajectory/lead size mismatch");
  if (!check_velocity_feasible(traj, p.speed, p.norm))
    throw std::invalid_argument("kkt_residual: trajectory violates the speed bound");
  if (distance(traj.front(), p.start, p.norm) > 1e-9 * std::max(1.0, p.speed))
    throw std::invalid_argument("kkt_residual: trajectory does not start at the pinned start");

  TrackingProblem t;
  t.leads = p.lead_points;
  t.speed = p.speed;
  t.norm = p.norm;
  t.loss = p.loss;
  t.pins = {{1, p.start}};
  auto chain = detail::tracking_chain(t, 0);
  std::vector<Vec2> corr;
  detail::TrackingObjective obj{&t.leads, nullptr, t.loss};

  std::vector<Vec2> x = traj.points;
  std::vector<Vec2> g(x.size());
  obj.grad(x, g);
  std::vector<Vec2> z = x;
  const double inv_L = 1.0 / obj.lipschitz();
  for (std::size_t i = 0; i < x.size(); ++i) z[i] -= inv_L * g[i];
  detail::project_chain(z, chain, st, corr);
  return detail::stacked_distance(z, x);
}

}  // namespace d2dplan
