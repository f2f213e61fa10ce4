#include <cmath>
#include <cstdio>
#include <vector>

#include "d2dplan/sim/presets.hpp"
#include "d2dplan/sim/run.hpp"

// Recomputes the rate_distance_scale_units constants frozen in
// include/d2dplan/sim/presets.hpp (and the RateModel default, which carries
// the fig4 value). Run after changing preset geometry or the rate model and
// paste the printed values back into the headers.
//
// Both presets are anchored on their direct-path rate: the crossing
// pedestrians at 1.1 Mbps, the drifting-peer walk at 3.1 Mbps. The rest of
// the reference Mbps values {1.9, 2.8, 3.5} for the delay sweep are printed
// for inspection; the exact pair-gap optimum concentrates proximity harder
// than those references assume, so they overshoot at larger delays (see the
// table this prints). Orderings are unaffected by the anchor choice.

using namespace d2dplan;
using namespace d2dplan::sim;

namespace {

// Average rates (direct, then one entry per delta) at a given scale.
std::vector<double> fig1_rates(double scale, const std::vector<int>& deltas) {
  ScenarioFile f = preset_fig1();
  f.rate.distance_scale = scale;
  std::vector<double> rates{run_direct(f).summary.average_rate_bps};
  for (const SweepRow& row : sweep_delta(f, deltas, "offline"))
    rates.push_back(row.report.summary.average_rate_bps);
  return rates;
}

double fig4_direct_rate(double scale) {
  ScenarioFile f = preset_fig4();
  f.rate.distance_scale = scale;
  return run_direct(f).summary.average_rate_bps;
}

// Scale at which a constant-separation walk at distance d reads target_bps.
double constant_distance_anchor(const RateModel& model, double d, double target_bps) {
  const double u = std::exp2(target_bps / model.bandwidth_hz) - 1.0;
  const double rss = model.sigma2 * u / (1.0 - u);
  return d * std::pow(rss, 1.0 / model.alpha);
}

}  // namespace

int main() {
  // The fig1 direct paths run parallel at constant separation, so the anchor
  // has a closed form.
  ScenarioFile fig1 = preset_fig1();
  const double separation = distance(fig1.start, fig1.second->start);
  const double fig1_scale = constant_distance_anchor(fig1.rate, separation, 1.1e6);
  std::printf("kFig1DistanceScale = %.17g\n", fig1_scale);
  const std::vector<int> deltas{1, 3, 5};
  const std::vector<double> refs{1.1e6, 1.9e6, 2.8e6, 3.5e6};
  const std::vector<double> fitted = fig1_rates(fig1_scale, deltas);
  const char* names[] = {"direct", "delta=1", "delta=3", "delta=5"};
  for (std::size_t i = 0; i < fitted.size(); ++i)
    std::printf("  %-8s %.4f Mbps (reference %.1f, off by %+.1f%%)\n", names[i], fitted[i] / 1e6,
                refs[i] / 1e6, 100.0 * (fitted[i] / refs[i] - 1.0));

  // The fig4 peer drifts, so anchor by bisection on the simulated direct
  // walk; the rate is monotone in the scale.
  double blo = 1.0, bhi = 2000.0;
  const double target = 3.1e6;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (blo + bhi);
    (fig4_direct_rate(mid) < target ? blo : bhi) = mid;
  }
  const double fig4_scale = 0.5 * (blo + bhi);
  std::printf("kFig4DistanceScale = %.17g (also the RateModel default)\n", fig4_scale);
  std::printf("  direct   %.4f Mbps (target 3.1)\n", fig4_direct_rate(fig4_scale) / 1e6);
  return 0;
}
