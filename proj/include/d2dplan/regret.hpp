#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "d2dplan/geometry.hpp"
#include "d2dplan/losses.hpp"
#include "d2dplan/ogd.hpp"
#include "d2dplan/solver.hpp"

// Regret instrumentation for the online planner against the velocity-
// constrained benchmark that sees the whole lead sequence in advance.
//
// With mu-strongly-convex losses, gradient step 1/gamma, gamma at least the
// gradient Lipschitz constant, and matching first iterates, the cumulative
// gap obeys
//
//   sum_t |online(t) - benchmark(t)|^2  <=  S* / (1 - sqrt(1 - mu/gamma))
//
// where S* is the benchmark's squared path length, and the regret obeys
//
//   regret  <=  G sqrt( T' S* / (1 - sqrt(1 - mu/gamma)) )
//
// with G the gradient bound over the operating region. Both right-hand sides
// are computed here; checks carry a solver slack because the benchmark is
// itself computed to a finite residual.

namespace d2dplan {

// A fixed loss family evaluated against per-slot leads.
struct LossSeries {
  LossSpec spec;
  std::vector<Vec2> leads;  // slot 1..T'

  int horizon() const { return static_cast<int>(leads.size()); }

  double value(int t, Vec2 x) const {
    if (t < 1 || t > horizon()) throw std::invalid_argument("LossSeries: slot out of range");
    return spec.value_at(x, leads[static_cast<std::size_t>(t - 1)]);
  }

  double cumulative(const Trajectory& traj) const {
    if (traj.size() < horizon()) throw std::invalid_argument("LossSeries: trajectory shorter than series");
    double s = 0.0;
    for (int t = 1; t <= horizon(); ++t) s += value(t, traj.at_slot(t));
    return s;
  }
};

// Sum of squared consecutive steps.
inline double squared_path_length(const Trajectory& traj) {
  double s = 0.0;
  for (std::size_t i = 1; i < traj.points.size(); ++i)
    s += norm2_sq(traj.points[i] - traj.points[i - 1]);
  return s;
}

// Cumulative online loss minus cumulative benchmark loss.
inline double offline_regret(const LossSeries& series, const Trajectory& online,
                             const Trajectory& benchmark) {
  return series.cumulative(online) - series.cumulative(benchmark);
}

// Cumulative online loss minus the per-slot minima; both loss families attain
// zero exactly at the lead, so this is just the cumulative online loss.
inline double dynamic_regret(const LossSeries& series, const Trajectory& online) {
  return series.cumulative(online);
}

inline double theorem_bound(double grad_bound, int horizon, double s_star, double mu,
                            double gamma) {
  if (!(grad_bound >= 0.0)) throw std::invalid_argument("theorem_bound: gradient bound must be nonnegative");
  if (horizon < 1) throw std::invalid_argument("theorem_bound: horizon must be >= 1");
  if (!(s_star >= 0.0)) throw std::invalid_argument("theorem_bound: path length must be nonnegative");
  if (!(mu > 0.0)) throw std::invalid_argument("theorem_bound: mu must be positive");
  if (!(gamma >= mu)) throw std::invalid_argument("theorem_bound: requires mu <= gamma");
  const double denom = 1.0 - std::sqrt(1.0 - mu / gamma);
  return grad_bound * std::sqrt(static_cast<double>(horizon) * s_star / denom);
}

struct GapCheck {
  double gap_sq = 0.0;       // sum over slots of |online - benchmark|^2
  double bound = 0.0;        // S* / (1 - sqrt(1 - mu/gamma))
  double approx_bound = 0.0; // sqrt(2 gamma / mu) S*, reported only, not a bound
  bool ok = false;
};

inline GapCheck iterate_gap_check(const Trajectory& online, const Trajectory& benchmark,
                                  double mu, double gamma, double eps_solver) {
  if (online.size() != benchmark.size())
    throw std::invalid_argument("iterate_gap_check: trajectory length mismatch");
  if (!(mu > 0.0) || !(gamma >= mu)) throw std::invalid_argument("iterate_gap_check: requires 0 < mu <= gamma");
  GapCheck g;
  for (std::size_t i = 0; i < online.points.size(); ++i)
    g.gap_sq += norm2_sq(online.points[i] - benchmark.points[i]);
  const double s_star = squared_path_length(benchmark);
  const double denom = 1.0 - std::sqrt(1.0 - mu / gamma);
  g.bound = s_star / denom;
  g.approx_bound = std::sqrt(2.0 * gamma / mu) * s_star;
  // Tiny absolute guard so exactly-degenerate cases are not failed on rounding.
  const double fp_guard = 64.0 * 1e-16 * (1.0 + g.gap_sq + g.bound);
  g.ok = g.gap_sq <= g.bound * (1.0 + eps_solver) + fp_guard;
  return g;
}

struct RegretReport {
  double gamma = 0.0;         // step-size parameter the online run used
  double grad_bound = 0.0;    // gradient bound G fed into the regret bound
  double online_cumloss = 0.0;
  double benchmark_cumloss = 0.0;
  double offline_regret = 0.0;
  double dynamic_regret = 0.0;
  double s_star = 0.0;        // benchmark squared path length
  double online_path_sq = 0.0;
  double iterate_gap_sq = 0.0;
  double theorem_bound = 0.0;
  double gap_bound = 0.0;
  double solver_slack = 0.0;  // benchmark kkt residual scaled by trajectory diameter
  bool gap_ok = false;        // iterate-gap inequality on its own
  bool bound_satisfied = false;
};

inline RegretReport make_regret_report(const LossSeries& series, const Trajectory& online,
                                       const SolveReport& benchmark, double gamma,
                                       double grad_bound) {
  const Trajectory& bench = benchmark.trajectory;
  if (online.size() != bench.size())
    throw std::invalid_argument("make_regret_report: trajectory length mismatch");
  const double mu = series.spec.strong_convexity();
  if (!(gamma >= mu)) throw std::invalid_argument("make_regret_report: requires mu <= gamma");

  RegretReport r;
  r.gamma = gamma;
  r.grad_bound = grad_bound;
  r.online_cumloss = series.cumulative(online);
  r.benchmark_cumloss = series.cumulative(bench);
  r.offline_regret = r.online_cumloss - r.benchmark_cumloss;
  r.dynamic_regret = r.online_cumloss;
  r.s_star = squared_path_length(bench);
  r.online_path_sq = squared_path_length(online);
  r.theorem_bound = theorem_bound(grad_bound, series.horizon(), r.s_star, mu, gamma);

  const double diam = max_pairwise_distance(bench.points);
  r.solver_slack = benchmark.kkt_residual * std::max(1.0, diam);

  const GapCheck gap = iterate_gap_check(online, bench, mu, gamma, r.solver_slack);
  r.iterate_gap_sq = gap.gap_sq;
  r.gap_bound = gap.bound;
  r.gap_ok = gap.ok;
  const bool regret_ok = r.offline_regret <= r.theorem_bound * (1.0 + 1e-6) + r.solver_slack;
  r.bound_satisfied = regret_ok && gap.ok;
  return r;
}

struct ProbeInstance {
  Scenario scenario;
  OgdConfig cfg;
};

struct ProbeRow {
  int horizon = 0;
  double regret = 0.0;
  double regret_per_slot = 0.0;
};

// Run the same scenario family across growing horizons and report the regret
// and its per-slot average; sublinear regret shows as a decreasing average.
inline std::vector<ProbeRow> sublinearity_probe(
    const std::function<ProbeInstance(int)>& family, const std::vector<int>& horizons,
    const SolveSettings& st = {}) {
  if (!family) throw std::invalid_argument("sublinearity_probe: empty family");
  std::vector<ProbeRow> rows;
  rows.reserve(horizons.size());
  for (int h : horizons) {
    if (h < 2) throw std::invalid_argument("sublinearity_probe: horizons must be >= 2");
    ProbeInstance inst = family(h);
    inst.scenario.validate();
    if (inst.scenario.horizon() != h)
      throw std::invalid_argument("sublinearity_probe: family returned a mismatched horizon");

    LossSeries series{inst.cfg.loss, {}};
    series.leads.reserve(static_cast<std::size_t>(h));
    for (int t = 1; t <= h; ++t)
      series.leads.push_back(leading_path(lambda_at(inst.cfg.schedule, t),
                                          inst.scenario.peer_at(t), inst.scenario.dest_at(t)));

    const Trajectory online = ogd_run(inst.scenario, inst.cfg);
    BenchmarkProblem bp;
    bp.start = inst.scenario.start;
    bp.lead_points = series.leads;
    bp.speed = inst.scenario.speed;
    bp.norm = inst.scenario.norm;
    bp.loss = inst.cfg.loss;
    const SolveReport bench = solve_benchmark(bp, st);

    ProbeRow row;
    row.horizon = h;
    row.regret = offline_regret(series, online, bench.trajectory);
    row.regret_per_slot = row.regret / static_cast<double>(h);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace d2dplan
