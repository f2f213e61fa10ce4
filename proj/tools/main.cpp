#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "d2dplan/mpc.hpp"
#include "d2dplan/sim/presets.hpp"
#include "d2dplan/sim/run.hpp"
#include "d2dplan/sim/scenario_file.hpp"
#include "d2dplan/solver.hpp"

// Command-line front end. Exit codes: 0 success, 2 validation or parse
// error, 3 infeasible (the offending slot goes to stderr).

namespace {

using namespace d2dplan;
using namespace d2dplan::sim;

struct CommonArgs {
  std::string scenario_path;
  std::string preset_name;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--scenario", args.scenario_path, "scenario file path");
  cmd->add_option("--preset", args.preset_name, "bundled preset: fig1, fig3, fig4, or fig5");
  cmd->add_option("--seed", args.seed, "RNG seed override")->each([&args](const std::string&) {
    args.seed_set = true;
  });
  cmd->add_option("--out", args.out_dir, "directory for CSV and summary files");
}

ScenarioFile load(const CommonArgs& args) {
  if (args.scenario_path.empty() == args.preset_name.empty())
    throw std::invalid_argument("pass exactly one of --scenario and --preset");
  ScenarioFile f = args.scenario_path.empty() ? preset(args.preset_name)
                                              : parse_scenario(args.scenario_path);
  if (args.seed_set) f.seed = args.seed;
  return f;
}

void emit(const std::string& out_dir, const std::string& name, const std::string& content) {
  if (out_dir.empty()) return;
  write_file(out_dir + "/" + name, content);
}

int run_single(const std::string& command, const CommonArgs& args) {
  const ScenarioFile f = load(args);
  RunReport rep;
  if (command == "direct")
    rep = run_direct(f);
  else if (command == "offline")
    rep = run_offline(f);
  else if (command == "mpc")
    rep = run_mpc(f);
  else
    rep = run_ogd(f);
  const std::string summary = render_summary(rep);
  std::fputs(summary.c_str(), stdout);
  emit(args.out_dir, command + "_slots.csv", render_csv(rep.slots));
  emit(args.out_dir, command + "_summary.txt", summary);
  return 0;
}

int run_compare_cmd(const CommonArgs& args) {
  const ScenarioFile f = load(args);
  const CompareReport rep = run_compare(f);
  const std::string summary = render_summary(rep);
  std::fputs(summary.c_str(), stdout);
  emit(args.out_dir, "compare_direct.csv", render_csv(rep.direct.slots));
  emit(args.out_dir, "compare_offline.csv", render_csv(rep.offline.slots));
  emit(args.out_dir, "compare_mpc.csv", render_csv(rep.mpc.slots));
  emit(args.out_dir, "compare_ogd.csv", render_csv(rep.ogd.slots));
  emit(args.out_dir, "compare_summary.txt", summary);
  return 0;
}

int run_sweep(const CommonArgs& args, const std::vector<int>& deltas, std::string algo) {
  const ScenarioFile f = load(args);
  if (algo.empty()) algo = f.cooperative() ? "offline" : "ogd";
  const std::vector<SweepRow> rows = sweep_delta(f, deltas, algo);
  const std::string table = render_sweep_csv(rows);
  std::fputs(table.c_str(), stdout);
  emit(args.out_dir, "sweep_delta.csv", table);
  for (const SweepRow& row : rows) {
    emit(args.out_dir, "sweep_delta_" + std::to_string(row.delta) + "_slots.csv",
         render_csv(row.report.slots));
    emit(args.out_dir, "sweep_delta_" + std::to_string(row.delta) + "_summary.txt",
         render_summary(row.report));
  }
  return 0;
}

int run_verify(const CommonArgs& args, int count) {
  std::uint64_t seed = args.seed_set ? args.seed : 7;
  const BoundsSuite suite = verify_bounds(count, seed);
  const std::string table = render_bounds_csv(suite);
  std::fputs(table.c_str(), stdout);
  std::printf("cases_total = %zu\ncases_ok = %zu\nall_ok = %d\n", suite.rows.size(),
              static_cast<std::size_t>(
                  std::count_if(suite.rows.begin(), suite.rows.end(),
                                [](const BoundsRow& r) { return r.regret_ok && r.gap_ok; })),
              suite.all_ok ? 1 : 0);
  emit(args.out_dir, "verify_bounds.csv", table);
  return suite.all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"device-to-device trajectory planning simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  std::vector<int> deltas{1, 3, 5};
  std::string sweep_algo;
  int verify_count = 120;

  for (const char* name : {"offline", "mpc", "ogd", "direct", "compare"})
    add_common(app.add_subcommand(name), args);

  CLI::App* sweep = app.add_subcommand("sweep-delta", "re-run one algorithm across delays");
  add_common(sweep, args);
  sweep->add_option("--deltas", deltas, "excess delay values")->delimiter(',');
  sweep->add_option("--algo", sweep_algo, "direct, offline, mpc, or ogd");

  CLI::App* verify = app.add_subcommand("verify-bounds", "randomised regret bound suite");
  add_common(verify, args);
  verify->add_option("--count", verify_count, "number of random cases");

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "compare") return run_compare_cmd(args);
    if (command == "sweep-delta") return run_sweep(args, deltas, sweep_algo);
    if (command == "verify-bounds") return run_verify(args, verify_count);
    return run_single(command, args);
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const UnreachableDestinationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const ScenarioParseError& e) {
    std::fprintf(stderr, "scenario error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
