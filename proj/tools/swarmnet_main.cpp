// Command-line front end: scenario generation, estimation runs, index
// derivation from stored estimates, and simulator round-trip validation.

#include "swarmnet/estimator.hpp"
#include "swarmnet/indices.hpp"
#include "swarmnet/io.hpp"
#include "swarmnet/simulator.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace swarmnet;

namespace {

struct CliFlags {
  std::string config_path;
  std::string input;
  std::string output_dir;
  std::string emit = "estimates,indices,entropy,networks";
  std::string scenario;
  std::string estimates_path;
  int lag_frames = 3;
  int window_len = 30;
  double lambda = 0.05;
  std::string lambda_mode;  // empty = infer from --lambda presence
  double solver_tol = 1e-9;
  int max_iters = 2000;
  std::string velocity_scheme = "forward";
  std::string stimulus = "none";
  std::vector<double> stim_center{20.0, 20.0};
  double stim_speed = 1.144;
  std::string stim_sense = "clockwise";
  bool flip_y = false;
  std::uint64_t seed = 0;
  double threshold = 0.0;
  int max_gap = 5;
  double fps = 60.0;
  std::string length_unit = "cm";
  int frames = 0;
  double noise = -1.0;
  double tol = 1e-4;
  bool list_scenarios = false;
};

void add_estimator_flags(CLI::App* cmd, CliFlags& f) {
  cmd->add_option("--lag", f.lag_frames, "Response lag in frames")
      ->capture_default_str();
  cmd->add_option("--window-len", f.window_len,
                  "Sliding-window length in frames")
      ->capture_default_str();
  cmd->add_option("--lambda", f.lambda,
                  "Sparsity penalty (absolute unless --lambda-mode says "
                  "otherwise; default rule is 0.05 * lambda_max per window)")
      ->capture_default_str();
  cmd->add_option("--lambda-mode", f.lambda_mode,
                  "absolute | fraction_of_max");
  cmd->add_option("--solver-tol", f.solver_tol,
                  "Coordinate-descent convergence tolerance")
      ->capture_default_str();
  cmd->add_option("--max-iters", f.max_iters, "Coordinate-descent sweep cap")
      ->capture_default_str();
  cmd->add_option("--velocity-scheme", f.velocity_scheme, "forward | central")
      ->capture_default_str();
}

void add_stimulus_flags(CLI::App* cmd, CliFlags& f) {
  cmd->add_option("--stimulus", f.stimulus,
                  "Stimulus field for csv inputs: none | rotating")
      ->capture_default_str();
  cmd->add_option("--stim-center", f.stim_center,
                  "Rotation center (two values)")
      ->expected(2);
  cmd->add_option("--stim-speed", f.stim_speed,
                  "Pattern angular speed, degrees/frame")
      ->capture_default_str();
  cmd->add_option("--stim-sense", f.stim_sense, "clockwise | counterclockwise")
      ->capture_default_str();
}

EstimatorConfig estimator_from_flags(const CLI::App* cmd, const CliFlags& f) {
  EstimatorConfig c;
  c.lag_frames = f.lag_frames;
  c.window_len = f.window_len;
  c.lambda = f.lambda;
  if (!f.lambda_mode.empty()) {
    if (f.lambda_mode == "absolute")
      c.lambda_rule = LambdaRule::absolute;
    else if (f.lambda_mode == "fraction_of_max")
      c.lambda_rule = LambdaRule::fraction_of_max;
    else
      throw ConfigError(
          "config: lambda_mode must be absolute or fraction_of_max");
  } else if (cmd->count("--lambda") > 0) {
    c.lambda_rule = LambdaRule::absolute;  // explicit value means literal
  }
  c.solver_tol = f.solver_tol;
  c.max_iters = f.max_iters;
  if (f.velocity_scheme == "forward")
    c.velocity_scheme = VelocityScheme::forward;
  else if (f.velocity_scheme == "central")
    c.velocity_scheme = VelocityScheme::central;
  else
    throw ConfigError("config: velocity_scheme must be forward or central");
  validate_estimator_config(c);
  return c;
}

StimulusField stimulus_from_flags(const CliFlags& f) {
  if (f.stimulus == "none") return StimulusField::none_field();
  if (f.stimulus != "rotating")
    throw ConfigError("config: stimulus must be none or rotating");
  RotationSense sense;
  if (f.stim_sense == "clockwise")
    sense = RotationSense::clockwise;
  else if (f.stim_sense == "counterclockwise")
    sense = RotationSense::counterclockwise;
  else
    throw ConfigError(
        "config: stim-sense must be clockwise or counterclockwise");
  return StimulusField::rotating(Vec2(f.stim_center[0], f.stim_center[1]),
                                 f.stim_speed, sense);
}

// Merge: start from --config (when given), then apply any flag the user
// actually passed on top of it.
RunConfig build_run_config(const CLI::App* cmd, const CliFlags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) cfg = load_run_config(f.config_path);
  if (cmd->count("--input") || cfg.input.empty()) cfg.input = f.input;
  if (cmd->count("--out") || cfg.output_dir.empty())
    cfg.output_dir = f.output_dir;
  if (f.config_path.empty() || cmd->count("--emit"))
    cfg.emit = parse_emit(f.emit);
  const bool estimator_flag =
      cmd->count("--lag") || cmd->count("--window-len") ||
      cmd->count("--lambda") || cmd->count("--lambda-mode") ||
      cmd->count("--solver-tol") || cmd->count("--max-iters") ||
      cmd->count("--velocity-scheme");
  if (f.config_path.empty() || estimator_flag)
    cfg.estimator = estimator_from_flags(cmd, f);
  if (f.config_path.empty() || cmd->count("--stimulus"))
    cfg.stimulus = stimulus_from_flags(f);
  if (cmd->count("--flip-y")) cfg.flip_y = f.flip_y;
  if (cmd->count("--seed")) cfg.seed = f.seed;
  if (cmd->count("--threshold")) cfg.net_threshold = f.threshold;
  if (cmd->count("--max-gap")) cfg.max_gap = f.max_gap;
  if (cmd->count("--fps")) cfg.fps = f.fps;
  if (cmd->count("--unit")) cfg.length_unit = f.length_unit;
  if (cmd->count("--frames")) cfg.frames = f.frames;
  if (cmd->count("--noise")) cfg.noise_sigma = f.noise;
  return cfg;
}

int cmd_simulate(const CLI::App* cmd, const CliFlags& f) {
  if (f.list_scenarios) {
    for (const auto& s : builtin_scenarios())
      std::printf("%s\n", s.name.c_str());
    return 0;
  }
  ScenarioSpec spec = find_scenario(f.scenario);
  spec.lag_frames = f.lag_frames;
  if (cmd->count("--seed")) spec.seed = f.seed;
  if (cmd->count("--frames")) resize_scenario(spec, f.frames);
  if (cmd->count("--noise")) spec.noise_sigma = f.noise;

  const SimulationResult sim = simulate(spec, f.window_len);
  fs::create_directories(f.output_dir);
  const fs::path dir(f.output_dir);
  write_trajectories_csv(sim.dataset, (dir / "trajectories.csv").string());

  const EmitSet emit = parse_emit(f.emit);
  const IndexSeries indices = compute_indices(sim.truth);
  if (emit.estimates)
    write_estimates_jsonl(sim.truth, (dir / "truth_estimates.jsonl").string());
  if (emit.indices) {
    write_indices_csv(indices, (dir / "truth_indices.csv").string());
    write_shares_csv(indices, (dir / "truth_shares.csv").string());
  }
  if (emit.entropy)
    write_entropy_json(influence_entropy(sim.truth),
                       indices.undefined_share_rows(),
                       (dir / "truth_entropy.json").string());
  if (emit.networks)
    write_networks_csv(sim.truth, f.threshold,
                       (dir / "truth_networks.csv").string());
  std::printf("wrote %s (%d frames, %d individuals, %zu truth windows)\n",
              (dir / "trajectories.csv").string().c_str(),
              sim.dataset.num_frames, sim.dataset.num_individuals,
              sim.truth.windows.size());
  return 0;
}

int cmd_indices(const CliFlags& f) {
  const EstimateSeries series = read_estimates_jsonl(f.estimates_path);
  fs::create_directories(f.output_dir);
  const fs::path dir(f.output_dir);
  const EmitSet emit = parse_emit(f.emit);
  const IndexSeries indices = compute_indices(series);
  if (emit.indices) {
    write_indices_csv(indices, (dir / "indices.csv").string());
    write_shares_csv(indices, (dir / "shares.csv").string());
  }
  if (emit.entropy)
    write_entropy_json(influence_entropy(series),
                       indices.undefined_share_rows(),
                       (dir / "entropy.json").string());
  if (emit.networks)
    write_networks_csv(series, f.threshold, (dir / "networks.csv").string());
  return 0;
}

// Round-trip check: simulate a named scenario, re-estimate it, and compare
// fitted weights against the planted schedule on windows that do not straddle
// a regime boundary.
int cmd_validate(const CLI::App* cmd, const CliFlags& f) {
  ScenarioSpec spec = find_scenario(f.scenario);
  spec.lag_frames = f.lag_frames;
  if (cmd->count("--seed")) spec.seed = f.seed;
  if (cmd->count("--frames")) resize_scenario(spec, f.frames);
  if (cmd->count("--noise")) spec.noise_sigma = f.noise;

  EstimatorConfig est = estimator_from_flags(cmd, f);
  if (cmd->count("--lambda") == 0) {
    est.lambda = 1e-6;  // recovery check wants a near-neutral penalty
    est.lambda_rule = LambdaRule::absolute;
  }

  const SimulationResult sim = simulate(spec, est.window_len);
  const EstimateSeries fitted = estimate_series(sim.dataset, spec.stimulus,
                                                est);

  double max_err = 0.0;
  int straddling = 0;
  for (size_t k = 0; k < fitted.windows.size(); ++k) {
    const int begin = static_cast<int>(k);
    const int end = begin + est.window_len + est.lag_frames;
    bool pure = false;
    for (const auto& entry : spec.schedule)
      pure |= begin >= entry.frame_begin && end <= entry.frame_end;
    if (!pure) {
      ++straddling;
      continue;
    }
    const auto& fit = fitted.windows[k];
    const auto& truth = sim.truth.windows[k];
    max_err =
        std::max(max_err, (fit.weights - truth.weights).cwiseAbs().maxCoeff());
    max_err = std::max(
        max_err,
        (fit.stim_weights - truth.stim_weights).cwiseAbs().maxCoeff());
  }
  std::printf(
      "scenario %-12s windows %4zu (skipped %d regime-straddling)  "
      "max |w_fit - w_true| = %.3e  (tolerance %.1e)\n",
      spec.name.c_str(), fitted.windows.size(), straddling, max_err, f.tol);
  if (max_err <= f.tol) {
    std::printf("OK\n");
    return 0;
  }
  std::printf("FAILED\n");
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "swarmnet: time-varying interaction-network estimation for small "
      "swarms under a directional stimulus"};
  app.require_subcommand(1);
  CliFlags f;

  CLI::App* sim = app.add_subcommand(
      "simulate",
      "Generate a builtin scenario: trajectories plus planted ground truth");
  sim->add_option("--scenario", f.scenario, "Builtin scenario name");
  sim->add_flag("--list", f.list_scenarios, "List builtin scenarios and exit");
  sim->add_option("--out", f.output_dir, "Output directory");
  sim->add_option("--frames", f.frames, "Override scenario length");
  sim->add_option("--noise", f.noise, "Override noise sigma");
  sim->add_option("--seed", f.seed, "Override scenario seed");
  sim->add_option("--emit", f.emit, "Truth outputs to write")
      ->capture_default_str();
  sim->add_option("--threshold", f.threshold,
                  "Minimum weight kept in truth_networks.csv")
      ->capture_default_str();
  sim->add_option("--lag", f.lag_frames, "Response lag in frames")
      ->capture_default_str();
  sim->add_option("--window-len", f.window_len,
                  "Window length for the truth series")
      ->capture_default_str();

  CLI::App* est = app.add_subcommand(
      "estimate",
      "Estimate interaction networks and indices from a trajectory csv or a "
      "simulated scenario");
  est->add_option("--config", f.config_path,
                  "JSON config; explicit flags override its values");
  est->add_option("--input", f.input,
                  "Trajectory csv path, or simulate:<scenario>");
  est->add_option("--out", f.output_dir, "Output directory");
  est->add_option("--emit", f.emit,
                  "Comma list from estimates,indices,entropy,networks")
      ->capture_default_str();
  add_estimator_flags(est, f);
  add_stimulus_flags(est, f);
  est->add_flag("--flip-y", f.flip_y,
                "Reflect csv y values (image-space input)");
  est->add_option("--seed", f.seed, "Seed for simulated inputs");
  est->add_option("--threshold", f.threshold,
                  "Minimum weight kept in networks.csv")
      ->capture_default_str();
  est->add_option("--max-gap", f.max_gap,
                  "Longest csv frame gap bridged by interpolation")
      ->capture_default_str();
  est->add_option("--fps", f.fps, "Frame rate of csv input")
      ->capture_default_str();
  est->add_option("--unit", f.length_unit, "Length unit tag of csv input")
      ->capture_default_str();
  est->add_option("--frames", f.frames, "Override simulated scenario length");
  est->add_option("--noise", f.noise, "Override simulated scenario noise");

  CLI::App* ind = app.add_subcommand(
      "indices", "Derive indices/entropy/networks from stored estimates");
  ind->add_option("--estimates", f.estimates_path, "estimates.jsonl path")
      ->required();
  ind->add_option("--out", f.output_dir, "Output directory")->required();
  CLI::Option* ind_emit = ind->add_option(
      "--emit", f.emit, "Comma list from indices,entropy,networks");
  ind->add_option("--threshold", f.threshold,
                  "Minimum weight kept in networks.csv")
      ->capture_default_str();

  CLI::App* val = app.add_subcommand(
      "validate",
      "Simulator round-trip: re-estimate a scenario and compare with its "
      "planted parameters");
  val->add_option("--scenario", f.scenario, "Builtin scenario name")
      ->required();
  val->add_option("--tol", f.tol, "Maximum tolerated |w_fit - w_true|")
      ->capture_default_str();
  val->add_option("--frames", f.frames, "Override scenario length");
  val->add_option("--noise", f.noise, "Override noise sigma");
  val->add_option("--seed", f.seed, "Override scenario seed");
  add_estimator_flags(val, f);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      if (!f.list_scenarios && (f.scenario.empty() || f.output_dir.empty()))
        throw ConfigError("config: simulate needs --scenario and --out");
      return cmd_simulate(sim, f);
    }
    if (est->parsed()) return run(build_run_config(est, f));
    if (ind->parsed()) {
      if (ind_emit->count() == 0) f.emit = "indices,entropy";
      return cmd_indices(f);
    }
    if (val->parsed()) return cmd_validate(val, f);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "swarmnet: %s\n", e.what());
    return 2;
  } catch (const IngestError& e) {
    std::fprintf(stderr, "swarmnet: %s [%s]\n", e.what(),
                 ingest_code_name(e.code));
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "swarmnet: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "swarmnet: %s\n", e.what());
    return 1;
  }
  return 2;
}
