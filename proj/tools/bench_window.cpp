// Benchmark: wall time to estimate one full sliding window (all individuals)
// at the default geometry, against the one-frame budget of a 60 fps stream.
// The threshold is hardware-relative; numbers here are from a commodity
// desktop core.

#include "swarmnet/estimator.hpp"
#include "swarmnet/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <vector>

using namespace swarmnet;
using Clock = std::chrono::steady_clock;

int main() {
  ScenarioSpec spec = find_scenario("stim-follow");
  resize_scenario(spec, 400);
  const SimulationResult sim = simulate(spec, 30);

  EstimatorConfig cfg;  // defaults: L = 30, lag = 3, lambda rule fraction

  // Warm-up pass so allocators and caches settle.
  for (int k = 0; k < 20; ++k)
    for (int i = 0; i < spec.num_individuals; ++i) {
      const DesignMatrix d =
          build_design(sim.dataset, spec.stimulus, i, k, cfg);
      fit_window(d, resolve_lambda(cfg, d), cfg.solver_tol, cfg.max_iters);
    }

  const int reps = 500;
  std::vector<double> ms(reps);
  for (int r = 0; r < reps; ++r) {
    const int k = r % 300;
    const auto t0 = Clock::now();
    for (int i = 0; i < spec.num_individuals; ++i) {
      const DesignMatrix d =
          build_design(sim.dataset, spec.stimulus, i, k, cfg);
      fit_window(d, resolve_lambda(cfg, d), cfg.solver_tol, cfg.max_iters);
    }
    ms[r] = std::chrono::duration<double, std::milli>(Clock::now() - t0)
                .count();
  }
  std::sort(ms.begin(), ms.end());
  const double median = ms[reps / 2];
  const double p95 = ms[static_cast<int>(reps * 0.95)];
  std::printf("one window (N=%d, L=%d, lag=%d): median %.4f ms, p95 %.4f ms, "
              "max %.4f ms over %d reps\n",
              spec.num_individuals, cfg.window_len, cfg.lag_frames, median,
              p95, ms.back(), reps);
  std::printf("60 fps frame budget: 16.7 ms -> %s\n",
              median < 16.7 ? "within budget" : "OVER budget");
  return median < 16.7 ? 0 : 1;
}
