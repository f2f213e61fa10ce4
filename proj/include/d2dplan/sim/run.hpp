#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "d2dplan/geometry.hpp"
#include "d2dplan/losses.hpp"
#include "d2dplan/mpc.hpp"
#include "d2dplan/ogd.hpp"
#include "d2dplan/rate.hpp"
#include "d2dplan/regret.hpp"
#include "d2dplan/scenario.hpp"
#include "d2dplan/sim/scenario_file.hpp"
#include "d2dplan/solver.hpp"
#include "d2dplan/version.hpp"

// Algorithm runners and report plumbing.
//
// Every runner resolves a ScenarioFile into trajectories, checks them
// against the velocity budget, and assembles a RunReport whose summary is
// recomputed from the per-slot records. Rendering uses %.17g throughout and
// carries no clocks or hostnames, so identical inputs produce byte-identical
// output.
//
// Command semantics:
//   direct   no deviation: walk at full speed toward the current destination
//            reading, horizon_slots points, the delay budget unused.
//   offline  full information. Cooperative files solve the two-user problem;
//            exogenous files solve the tracking problem against the true
//            peer stream with the endpoint pinned on the final destination
//            reading.
//   mpc      receding horizon, constant-peer model, one committed step per
//            slot.
//   ogd      the online planner; its report carries the regret block
//            comparing it with the full-information benchmark on the same
//            leading path.
//   compare  direct + offline + mpc + ogd on identical streams.

namespace d2dplan::sim {

struct SlotRecord {
  int t = 1;
  Vec2 x1;       // planned user
  Vec2 x2;       // peer or second user
  Vec2 dest;     // destination reading
  double lambda = 0.0;
  double dist = 0.0;   // |x1 - x2|, the link length
  double loss = 0.0;   // per-slot tracking loss f_t(x1)
  double rate_bps = 0.0;
};

struct RunSummary {
  double average_rate_bps = 0.0;
  double downloaded_bits = 0.0;
  double terminal_distance = 0.0;  // planned user to final destination reading
};

struct RunReport {
  std::string command;
  ScenarioFile config;
  std::vector<SlotRecord> slots;
  RunSummary summary;
  std::optional<RegretReport> regret;
  std::optional<Trajectory> trajectory2;  // cooperative partner
  double objective = 0.0;                 // solver objective when one ran
  int iterations = 0;
};

namespace detail {

// The rate model rejects zero link length (the power law is singular there);
// floor the length so coincident or near-coincident users read a saturated
// rate instead of tripping the positivity check.
inline double link_rate(double dist, const RateModel& model,
                        double min_dist_units = 1e-3) {
  return rate(std::max(dist, min_dist_units), model);
}

inline void ensure_feasible(const Trajectory& traj, double v, NormKind norm,
                            const char* who) {
  if (!check_velocity_feasible(traj, v, norm, 1e-6))
    throw std::logic_error(std::string(who) + ": produced a velocity-infeasible trajectory");
}

inline Vec2 at_or_last(const std::vector<Vec2>& pts, int t) {
  const std::size_t i = static_cast<std::size_t>(t - 1);
  return i < pts.size() ? pts[i] : pts.back();
}

// Full-speed walk toward the current destination reading; waits in place
// once it arrives (between destination events).
inline Trajectory direct_walk(Vec2 start, const std::vector<Vec2>& dests, int slots, double v,
                              NormKind norm) {
  Trajectory traj;
  traj.points.push_back(start);
  for (int t = 2; t <= slots; ++t) {
    const Vec2 cur = traj.points.back();
    const Vec2 dest = at_or_last(dests, t);
    const double d = distance(cur, dest, norm);
    traj.points.push_back(d <= v ? dest : cur + (v / d) * (dest - cur));
  }
  return traj;
}

}  // namespace detail

// Per-slot records for a planned trajectory against peer and destination
// readings. The loss column is the tracking loss against the leading path,
// except for cooperative runs where it is the squared pair gap.
inline std::vector<SlotRecord> make_records(const Trajectory& x1, const std::vector<Vec2>& x2,
                                            const std::vector<Vec2>& dests,
                                            const LambdaSchedule& schedule, const LossSpec& loss,
                                            const RateModel& model) {
  std::vector<SlotRecord> out;
  out.reserve(static_cast<std::size_t>(x1.size()));
  for (int t = 1; t <= x1.size(); ++t) {
    SlotRecord r;
    r.t = t;
    r.x1 = x1.at_slot(t);
    r.x2 = detail::at_or_last(x2, t);
    r.dest = detail::at_or_last(dests, t);
    r.lambda = t <= schedule.horizon ? lambda_at(schedule, t) : 0.0;
    r.dist = norm2(r.x1 - r.x2);
    r.loss = loss.value_at(r.x1, leading_path(r.lambda, r.x2, r.dest));
    r.rate_bps = detail::link_rate(r.dist, model);
    out.push_back(r);
  }
  return out;
}

inline RunSummary summarize(const std::vector<SlotRecord>& slots, double slot_duration_s) {
  if (slots.empty()) throw std::invalid_argument("summarize: no slot records");
  RunSummary s;
  for (const SlotRecord& r : slots) s.downloaded_bits += r.rate_bps * slot_duration_s;
  s.average_rate_bps = s.downloaded_bits / (slot_duration_s * static_cast<double>(slots.size()));
  const SlotRecord& last = slots.back();
  s.terminal_distance = norm2(last.x1 - last.dest);
  return s;
}

inline RunReport run_direct(const ScenarioFile& f) {
  RunReport rep;
  rep.command = "direct";
  rep.config = f;
  const int slots = f.horizon_slots;  // the delay budget is deliberately unused
  const std::vector<Vec2> dests = dest_stream(f, f.total_slots());

  Trajectory x1 = detail::direct_walk(f.start, dests, slots, f.speed, f.norm);
  detail::ensure_feasible(x1, f.speed, f.norm, "run_direct");

  if (f.cooperative()) {
    const SecondUser& u = *f.second;
    Trajectory t2 = detail::direct_walk(u.start, {u.dest}, u.horizon_slots, u.speed, f.norm);
    detail::ensure_feasible(t2, u.speed, f.norm, "run_direct");
    const LambdaSchedule pair_schedule = LambdaSchedule::custom_values(
        std::vector<double>(static_cast<std::size_t>(slots), 1.0));
    rep.slots = make_records(x1, t2.points, dests, pair_schedule, LossSpec::squared(), f.rate);
    rep.trajectory2 = std::move(t2);
  } else {
    const std::vector<Vec2> x2 = generate_peer(*f.peer, slots, f.seed);
    rep.slots = make_records(x1, x2, dests, make_schedule(f, f.total_slots()), make_loss(f),
                             f.rate);
  }

  rep.summary = summarize(rep.slots, f.slot_duration_s);
  return rep;
}

inline RunReport run_offline(const ScenarioFile& f, const SolveSettings& st = {}) {
  RunReport rep;
  rep.command = "offline";
  rep.config = f;
  const int slots = f.total_slots();
  const std::vector<Vec2> dests = dest_stream(f, slots);
  const LossSpec loss = make_loss(f);
  const LambdaSchedule schedule = make_schedule(f, slots);

  if (f.cooperative()) {
    const SolveReport sol = solve_cooperative(to_cooperative(f), st);
    detail::ensure_feasible(sol.trajectory, f.speed, f.norm, "run_offline");
    detail::ensure_feasible(*sol.trajectory2, f.second->speed, f.norm, "run_offline");
    // All-peer lambda: the loss column reads as the squared pair gap.
    const LambdaSchedule pair_schedule = LambdaSchedule::custom_values(
        std::vector<double>(static_cast<std::size_t>(sol.trajectory.size()), 1.0));
    rep.slots = make_records(sol.trajectory, sol.trajectory2->points, dests, pair_schedule,
                             LossSpec::squared(), f.rate);
    rep.trajectory2 = *sol.trajectory2;
    rep.objective = sol.objective;
    rep.iterations = sol.iterations;
  } else {
    const Scenario sc = to_scenario(f);
    TrackingProblem p;
    p.leads.assign(sc.peer_stream.begin(), sc.peer_stream.begin() + slots);
    p.speed = sc.speed;
    p.norm = sc.norm;
    p.loss = LossSpec::squared();
    p.pins.emplace_back(1, sc.start);
    p.pins.emplace_back(slots, sc.dest_at(slots));
    const SolveReport sol = solve_tracking(p, st);
    detail::ensure_feasible(sol.trajectory, f.speed, f.norm, "run_offline");
    rep.slots = make_records(sol.trajectory, sc.peer_stream, dests, schedule, loss, f.rate);
    rep.objective = sol.objective;
    rep.iterations = sol.iterations;
  }
  rep.summary = summarize(rep.slots, f.slot_duration_s);
  return rep;
}

inline RunReport run_mpc(const ScenarioFile& f, const SolveSettings& st = {}) {
  if (f.cooperative())
    throw std::invalid_argument("run_mpc: cooperative scenarios support offline only");
  RunReport rep;
  rep.command = "mpc";
  rep.config = f;
  const Scenario sc = to_scenario(f);
  const MpcRunResult res = mpc_run(sc, st);
  detail::ensure_feasible(res.trajectory, f.speed, f.norm, "run_mpc");
  rep.slots = make_records(res.trajectory, sc.peer_stream, sc.dest_stream,
                           make_schedule(f, sc.horizon()), make_loss(f), f.rate);
  rep.summary = summarize(rep.slots, f.slot_duration_s);
  if (!res.reports.empty()) {
    rep.objective = res.reports.back().objective;
    for (const SolveReport& r : res.reports) rep.iterations += r.iterations;
  }
  return rep;
}

// Regret block for an online trajectory: benchmark on the same leading path,
// bound constants from the loss and the scenario's region diameter.
inline RegretReport regret_block(const Scenario& sc, const OgdConfig& cfg,
                                 const Trajectory& online, const SolveSettings& st = {}) {
  LossSeries series{cfg.loss, {}};
  const int slots = sc.horizon();
  series.leads.reserve(static_cast<std::size_t>(slots));
  for (int t = 1; t <= slots; ++t)
    series.leads.push_back(
        leading_path(lambda_at(cfg.schedule, t), sc.peer_at(t), sc.dest_at(t)));
  BenchmarkProblem bp;
  bp.start = sc.start;
  bp.lead_points = series.leads;
  bp.speed = sc.speed;
  bp.norm = sc.norm;
  bp.loss = cfg.loss;
  const SolveReport bench = solve_benchmark(bp, st);
  const double R = region_diameter(sc);
  return make_regret_report(series, online, bench, cfg.gamma, cfg.loss.grad_bound(R));
}

inline RunReport run_ogd(const ScenarioFile& f, const SolveSettings& st = {}) {
  if (f.cooperative())
    throw std::invalid_argument("run_ogd: cooperative scenarios support offline only");
  RunReport rep;
  rep.command = "ogd";
  rep.config = f;
  const Scenario sc = to_scenario(f);
  const OgdConfig cfg = make_ogd_config(f, sc);
  const Trajectory online = ogd_run(sc, cfg);
  detail::ensure_feasible(online, f.speed, f.norm, "run_ogd");
  rep.slots = make_records(online, sc.peer_stream, sc.dest_stream, cfg.schedule, cfg.loss, f.rate);
  rep.summary = summarize(rep.slots, f.slot_duration_s);
  rep.regret = regret_block(sc, cfg, online, st);
  return rep;
}

struct CompareReport {
  RunReport direct;
  RunReport offline;
  RunReport mpc;
  RunReport ogd;
};

inline CompareReport run_compare(const ScenarioFile& f, const SolveSettings& st = {}) {
  if (f.cooperative())
    throw std::invalid_argument("run_compare: cooperative scenarios support offline only");
  CompareReport rep;
  rep.direct = run_direct(f);
  rep.offline = run_offline(f, st);
  rep.mpc = run_mpc(f, st);
  rep.ogd = run_ogd(f, st);
  return rep;
}

struct SweepRow {
  int delta = 0;
  RunReport report;
};

// Re-run one algorithm across excess-delay values. The destination-event and
// custom-lambda features are slot-indexed against a fixed horizon, so they
// are rejected here rather than silently reinterpreted.
inline std::vector<SweepRow> sweep_delta(const ScenarioFile& base, const std::vector<int>& deltas,
                                         const std::string& algo, const SolveSettings& st = {}) {
  if (deltas.empty()) throw std::invalid_argument("sweep_delta: no delta values");
  if (!base.dest_events.empty() || base.lambda == LambdaSpecKind::Custom)
    throw std::invalid_argument(
        "sweep_delta: scenarios with dest_events or custom lambda values have a fixed horizon");
  std::vector<SweepRow> rows;
  for (int delta : deltas) {
    if (delta < 0) throw std::invalid_argument("sweep_delta: deltas must be >= 0");
    ScenarioFile f = base;
    f.excess_delay_slots = delta;
    if (f.second) f.second->excess_delay_slots = delta;
    SweepRow row;
    row.delta = delta;
    if (algo == "direct")
      row.report = run_direct(f);
    else if (algo == "offline")
      row.report = run_offline(f, st);
    else if (algo == "mpc")
      row.report = run_mpc(f, st);
    else if (algo == "ogd")
      row.report = run_ogd(f, st);
    else
      throw std::invalid_argument("sweep_delta: unknown algorithm '" + algo + "'");
    rows.push_back(std::move(row));
  }
  return rows;
}

// One randomised bound-verification case and its verdict.
struct BoundsRow {
  int index = 0;
  std::uint64_t seed = 0;
  int slots = 0;
  double mu = 0.0;
  double gamma = 0.0;
  double sstar = 0.0;
  double offline_regret = 0.0;
  double theorem_bound = 0.0;
  bool regret_ok = false;
  double gap_sq = 0.0;
  double gap_bound = 0.0;
  bool gap_ok = false;
};

struct BoundsSuite {
  std::vector<BoundsRow> rows;
  bool all_ok = true;
};

// Monte Carlo sweep over random scenarios run at gamma = min_gamma: checks
// that the measured regret respects the bound and that the iterate-gap
// inequality holds case by case.
inline BoundsSuite verify_bounds(int count, std::uint64_t base_seed,
                                 const SolveSettings& st = {}) {
  if (count < 1) throw std::invalid_argument("verify_bounds: count must be >= 1");
  BoundsSuite suite;
  std::mt19937_64 rng(base_seed);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
  };

  for (int i = 0; i < count; ++i) {
    const std::uint64_t case_seed = rng();
    Scenario sc;
    sc.start = {uniform(-20, 20), uniform(-20, 20)};
    sc.speed = uniform(0.5, 3.0);
    sc.horizon_T = 8 + static_cast<int>(rng() % 17);
    sc.excess_delay = static_cast<int>(rng() % 5);
    const int slots = sc.horizon();

    const Vec2 dest{uniform(-20, 20), uniform(-20, 20)};
    sc.dest_stream.assign(static_cast<std::size_t>(slots), dest);
    if (rng() % 4 == 0) {
      const int evt = 2 + static_cast<int>(rng() % (slots - 1));
      const Vec2 moved{uniform(-20, 20), uniform(-20, 20)};
      for (int t = evt; t <= slots; ++t) sc.dest_stream[static_cast<std::size_t>(t - 1)] = moved;
    }

    PeerGenerator gen;
    const std::uint64_t pick = rng() % 3;
    if (pick == 0)
      gen = StaticPeer{{uniform(-20, 20), uniform(-20, 20)}};
    else if (pick == 1)
      gen = LinearPeer{{uniform(-20, 20), uniform(-20, 20)},
                       {uniform(-1.5, 1.5), uniform(-1.5, 1.5)}};
    else
      gen = RandomWalkPeer{{uniform(-20, 20), uniform(-20, 20)}, uniform(0.2, 2.0), case_seed};
    sc.peer_stream = generate_peer(gen, slots, case_seed);

    OgdConfig cfg;
    const double mu = uniform(0.1, 0.9);
    cfg.loss = LossSpec::huber(mu, sc.speed);
    const double R = region_diameter(sc);
    cfg.gamma = min_gamma(mu, R, sc.speed);
    const std::uint64_t lk = rng() % 3;
    if (lk == 0)
      cfg.schedule = LambdaSchedule::linear_down(slots);
    else if (lk == 1)
      cfg.schedule = LambdaSchedule::linear_up(slots);
    else
      cfg.schedule = LambdaSchedule::custom_values(
          std::vector<double>(static_cast<std::size_t>(slots), uniform(0.0, 1.0)));

    const Trajectory online = ogd_run(sc, cfg);
    const RegretReport r = regret_block(sc, cfg, online, st);

    BoundsRow row;
    row.index = i;
    row.seed = case_seed;
    row.slots = slots;
    row.mu = mu;
    row.gamma = cfg.gamma;
    row.sstar = r.s_star;
    row.offline_regret = r.offline_regret;
    row.theorem_bound = r.theorem_bound;
    row.regret_ok = r.offline_regret <= r.theorem_bound * (1.0 + 1e-6) + r.solver_slack;
    row.gap_sq = r.iterate_gap_sq;
    row.gap_bound = r.gap_bound;
    row.gap_ok = r.gap_ok;
    suite.all_ok = suite.all_ok && row.regret_ok && row.gap_ok;
    suite.rows.push_back(row);
  }
  return suite;
}

// --- rendering ---------------------------------------------------------

inline const char* kCsvHeader = "t,x1_x,x1_y,x2_x,x2_y,d_x,d_y,lambda,dist,loss,rate_bps";

inline std::string render_csv(const std::vector<SlotRecord>& slots) {
  using detail::fmt;
  std::string out = kCsvHeader;
  out += "\n";
  for (const SlotRecord& r : slots) {
    out += std::to_string(r.t);
    for (double v : {r.x1.x, r.x1.y, r.x2.x, r.x2.y, r.dest.x, r.dest.y, r.lambda, r.dist,
                     r.loss, r.rate_bps}) {
      out += ",";
      out += fmt(v);
    }
    out += "\n";
  }
  return out;
}

namespace detail {

inline void kv_line(std::string& out, const std::string& key, const std::string& value) {
  out += key;
  out += " = ";
  out += value;
  out += "\n";
}

inline void summary_block(std::string& out, const std::string& prefix, const RunReport& rep) {
  kv_line(out, prefix + "average_rate_bps", fmt(rep.summary.average_rate_bps));
  kv_line(out, prefix + "downloaded_bits", fmt(rep.summary.downloaded_bits));
  kv_line(out, prefix + "terminal_distance_units", fmt(rep.summary.terminal_distance));
  kv_line(out, prefix + "slots", std::to_string(rep.slots.size()));
}

inline void regret_lines(std::string& out, const RegretReport& r) {
  kv_line(out, "regret_gamma", fmt(r.gamma));
  kv_line(out, "regret_grad_bound", fmt(r.grad_bound));
  kv_line(out, "regret_s_star", fmt(r.s_star));
  kv_line(out, "regret_online_cumloss", fmt(r.online_cumloss));
  kv_line(out, "regret_benchmark_cumloss", fmt(r.benchmark_cumloss));
  kv_line(out, "regret_offline_regret", fmt(r.offline_regret));
  kv_line(out, "regret_theorem_bound", fmt(r.theorem_bound));
  kv_line(out, "regret_iterate_gap_sq", fmt(r.iterate_gap_sq));
  kv_line(out, "regret_gap_bound", fmt(r.gap_bound));
  kv_line(out, "regret_gap_ok", r.gap_ok ? "1" : "0");
  kv_line(out, "regret_bound_satisfied", r.bound_satisfied ? "1" : "0");
}

}  // namespace detail

// Structured summary: run identity, the full configuration echo, then the
// metrics. Single-run reports use unprefixed metric keys.
inline std::string render_summary(const RunReport& rep) {
  using detail::kv_line;
  std::string out;
  kv_line(out, "command", rep.command);
  kv_line(out, "library_version", kVersion);
  out += "\n# configuration\n";
  out += render_scenario_file(rep.config);
  out += "\n# results\n";
  detail::summary_block(out, "", rep);
  if (rep.iterations > 0) {
    kv_line(out, "solver_objective", detail::fmt(rep.objective));
    kv_line(out, "solver_iterations", std::to_string(rep.iterations));
  }
  if (rep.regret) detail::regret_lines(out, *rep.regret);
  return out;
}

inline std::string render_summary(const CompareReport& rep) {
  using detail::kv_line;
  std::string out;
  kv_line(out, "command", "compare");
  kv_line(out, "library_version", kVersion);
  out += "\n# configuration\n";
  out += render_scenario_file(rep.direct.config);
  out += "\n# results\n";
  detail::summary_block(out, "direct_", rep.direct);
  detail::summary_block(out, "offline_", rep.offline);
  detail::summary_block(out, "mpc_", rep.mpc);
  detail::summary_block(out, "ogd_", rep.ogd);
  if (rep.ogd.regret) detail::regret_lines(out, *rep.ogd.regret);
  return out;
}

inline std::string render_sweep_csv(const std::vector<SweepRow>& rows) {
  using detail::fmt;
  std::string out = "delta,average_rate_bps,downloaded_bits,terminal_distance_units\n";
  for (const SweepRow& r : rows) {
    out += std::to_string(r.delta);
    out += ",";
    out += fmt(r.report.summary.average_rate_bps);
    out += ",";
    out += fmt(r.report.summary.downloaded_bits);
    out += ",";
    out += fmt(r.report.summary.terminal_distance);
    out += "\n";
  }
  return out;
}

inline std::string render_bounds_csv(const BoundsSuite& suite) {
  using detail::fmt;
  std::string out =
      "case,seed,slots,mu,gamma,sstar,offline_regret,theorem_bound,regret_ok,"
      "iterate_gap_sq,gap_bound,gap_ok\n";
  for (const BoundsRow& r : suite.rows) {
    out += std::to_string(r.index);
    out += "," + std::to_string(r.seed);
    out += "," + std::to_string(r.slots);
    for (double v : {r.mu, r.gamma, r.sstar, r.offline_regret, r.theorem_bound}) {
      out += ",";
      out += fmt(v);
    }
    out += r.regret_ok ? ",1" : ",0";
    out += "," + fmt(r.gap_sq);
    out += "," + fmt(r.gap_bound);
    out += r.gap_ok ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

}  // namespace d2dplan::sim
