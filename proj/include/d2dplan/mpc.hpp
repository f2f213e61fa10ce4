#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "d2dplan/geometry.hpp"
#include "d2dplan/scenario.hpp"
#include "d2dplan/solver.hpp"

// Receding-horizon planner. At every slot t it re-solves the full-horizon
// tracking problem against the peer's current position, with the already
// travelled prefix pinned and the terminal slot pinned to the current
// destination reading, then commits only the next step. A jump of the
// destination (or an adverse peer move) can leave too few slots to reach the
// terminal pin; that surfaces as InfeasibleError carrying the slot index and
// the feasible prefix committed so far.

namespace d2dplan {

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(int slot, Trajectory committed)
      : std::runtime_error("infeasible at slot " + std::to_string(slot) +
                           ": destination out of reach in the remaining slots"),
        slot_(slot),
        committed_(std::move(committed)) {}
  int slot() const { return slot_; }
  const Trajectory& committed() const { return committed_; }

 private:
  int slot_ = 0;
  Trajectory committed_;
};

// True when dest is reachable from `from` within `slots_remaining` steps at
// per-slot speed v. The boundary counts as reachable; the relative slack is
// the same one the solver's pin validation uses, so both sides agree on
// exactly-tight geometries.
inline bool reachability_check(Vec2 from, Vec2 dest, double v, int slots_remaining,
                               NormKind norm = NormKind::Euclidean) {
  if (!(v > 0.0)) throw std::invalid_argument("reachability_check: speed must be positive");
  if (slots_remaining < 0) throw std::invalid_argument("reachability_check: negative slot count");
  const double budget = v * static_cast<double>(slots_remaining);
  return distance(from, dest, norm) <= budget * (1.0 + 1e-9);
}

struct MpcState {
  Trajectory committed;   // x(1..slot), always velocity-feasible
  int slot = 1;           // current slot, 1-based
  Trajectory last_plan;   // most recent full-horizon plan
};

// One receding-horizon solve at the current state. peer_now and dest_now are
// the slot-t readings; the returned plan covers all T' slots.
inline SolveReport mpc_plan(const MpcState& state, Vec2 peer_now, Vec2 dest_now, int horizon,
                            double v, NormKind norm = NormKind::Euclidean,
                            const SolveSettings& st = {}) {
  if (state.committed.empty()) throw std::invalid_argument("mpc_plan: empty committed prefix");
  if (state.slot != state.committed.size())
    throw std::invalid_argument("mpc_plan: slot does not match committed prefix length");
  if (horizon < state.slot) throw std::invalid_argument("mpc_plan: horizon shorter than prefix");
  if (!reachability_check(state.committed.back(), dest_now, v, horizon - state.slot, norm))
    throw InfeasibleError(state.slot, state.committed);

  TrackingProblem p;
  p.leads.assign(static_cast<std::size_t>(horizon), peer_now);
  p.speed = v;
  p.norm = norm;
  p.loss = LossSpec::squared();
  for (int i = 0; i < state.slot; ++i)
    p.pins.emplace_back(i + 1, state.committed[static_cast<std::size_t>(i)]);
  p.pins.emplace_back(horizon, dest_now);
  return solve_tracking(p, st);
}

struct MpcRunResult {
  Trajectory trajectory;
  std::vector<SolveReport> reports;  // one per slot 1..T'-1
};

// Algorithm: walk slots 1..T'-1, re-planning each time from the committed
// prefix with the current peer/destination readings and committing the next
// planned position. Throws InfeasibleError as soon as the current
// destination reading is out of reach.
inline MpcRunResult mpc_run(const Scenario& sc, const SolveSettings& st = {}) {
  sc.validate();
  const int horizon = sc.horizon();

  MpcRunResult out;
  MpcState state;
  state.committed = Trajectory{{sc.start}};
  state.slot = 1;

  for (int t = 1; t < horizon; ++t) {
    state.slot = t;
    const Vec2 peer_now = sc.peer_at(t);
    const Vec2 dest_now = sc.dest_at(t);
    SolveReport plan = mpc_plan(state, peer_now, dest_now, horizon, sc.speed, sc.norm, st);
    state.last_plan = plan.trajectory;

    // Commit the next planned position with the solver's tolerance debt paid
    // off: the step is snapped exactly into the speed ball, and if that
    // candidate leaves the current destination reading out of reach (possible
    // only through accumulated numerical slack, since the reachability check
    // above passed), the commit falls back to the forced-pace walk straight
    // at the destination, which is the unique feasible behavior when no
    // slack is left.
    const Vec2 cur = state.committed.back();
    Vec2 next = cur + detail::project_step(plan.trajectory.at_slot(t + 1) - cur, sc.speed, sc.norm);
    const double budget_next = sc.speed * static_cast<double>(horizon - t - 1);
    if (distance(next, dest_now, sc.norm) > budget_next * (1.0 + 1e-9)) {
      const Vec2 gap = dest_now - cur;
      const double d = distance(cur, dest_now, sc.norm);
      double step = std::min(sc.speed, d);
      const double forced = d - budget_next;
      if (forced > step) step = std::min(forced, sc.speed * (1.0 + 1e-9));
      next = d <= step ? dest_now : cur + (step / d) * gap;
    }
    state.committed.points.push_back(next);
    out.reports.push_back(std::move(plan));
  }

  out.trajectory = std::move(state.committed);
  return out;
}

}  // namespace d2dplan
