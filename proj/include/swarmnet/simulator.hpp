#pragma once

// Forward generative model: advances a group of individuals under planted
// attraction / autonomous / stimulus parameters, producing trajectories plus
// the planted parameters aligned to each sliding estimation window.

#include "swarmnet/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace swarmnet {

/// Planted model parameters, shaped like one WindowEstimate without the
/// window index.
struct PlantedParams {
  Eigen::MatrixXd weights;          // N x N, diagonal = autonomous magnitude
  Eigen::VectorXd stim_weights;     // N
  Eigen::Matrix2Xd preferred_dirs;  // 2 x N, unit or zero columns
};

/// Half-open frame range [frame_begin, frame_end) governed by one parameter
/// set. A scenario's entries must partition [0, num_frames).
struct ScheduleEntry {
  int frame_begin = 0;
  int frame_end = 0;
  PlantedParams params;
};

struct Arena {
  Vec2 lo = Vec2(0.0, 0.0);
  Vec2 hi = Vec2(40.0, 40.0);
};

struct ScenarioSpec {
  std::string name;
  int num_individuals = 0;
  int num_frames = 0;
  Eigen::Matrix2Xd initial_positions;  // column per individual, inside arena
  std::vector<ScheduleEntry> schedule;
  StimulusField stimulus;
  double noise_sigma = 0.0;  // per-component std, length units per frame
  int lag_frames = 3;
  std::uint64_t seed = 0;
  Arena arena;
  double frame_period = 1.0 / 60.0;
  std::string length_unit = "cm";
};

/// Throws ConfigError on schedule gaps/overlaps, malformed planted
/// parameters, initial positions outside the arena, or negative noise.
void validate_scenario(const ScenarioSpec& spec);

/// Parameter set governing the given frame.
const PlantedParams& params_at(const ScenarioSpec& spec, int frame);

/// Model velocity (length per frame) of individual i: sum of attraction
/// toward each neighbor, the autonomous term, and the stimulus term, all
/// evaluated on the given per-individual positions (one column each).
Vec2 model_velocity(const PlantedParams& params,
                    const Eigen::Matrix2Xd& positions,
                    const StimulusField& field, int frame, int i);

/// Positions at frame t + lag_frames given positions for frames [0, t]
/// (rows of `known`, laid out like TrajectoryDataset::positions).
/// Intermediate frames are filled by the same per-frame rule.
Eigen::Matrix2Xd step(const Eigen::MatrixXd& known, const ScenarioSpec& spec,
                      int t);

struct SimulationResult {
  TrajectoryDataset dataset;
  // Planted parameters at each sliding window's center frame; empty when the
  // scenario is shorter than one window.
  EstimateSeries truth;
};

/// Deterministic for a fixed seed. `window_len` fixes the geometry of the
/// truth series (window k spans frames [k, k + window_len)).
SimulationResult simulate(const ScenarioSpec& spec, int window_len);

/// Changes a scenario's length, rescaling schedule boundaries so each regime
/// keeps its proportional share of the run.
void resize_scenario(ScenarioSpec& spec, int num_frames);

/// Named reference scenes: "stim-follow", "free-school", "decouple",
/// "leader", "hetero-stim". All use five individuals, 60 fps metadata, a
/// 40 x 40 arena and pattern speeds from {0.286, 0.572, 1.144} deg/frame.
std::vector<ScenarioSpec> builtin_scenarios();

/// Throws ConfigError when the name is not a builtin scenario.
ScenarioSpec find_scenario(const std::string& name);

}  // namespace swarmnet
