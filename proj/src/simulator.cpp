#include "swarmnet/simulator.hpp"

#include "swarmnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace swarmnet {

namespace {

constexpr double kSpeedSlow = 0.286;    // deg/frame
constexpr double kSpeedMedium = 0.572;  // deg/frame
constexpr double kSpeedFast = 1.144;    // deg/frame

Vec2 clamp_to(const Arena& arena, const Vec2& p) {
  return Vec2(std::clamp(p.x(), arena.lo.x(), arena.hi.x()),
              std::clamp(p.y(), arena.lo.y(), arena.hi.y()));
}

Eigen::Matrix2Xd frame_positions(const Eigen::MatrixXd& pos, int t, int n) {
  Eigen::Matrix2Xd out(2, n);
  for (int i = 0; i < n; ++i) {
    out(0, i) = pos(t, 2 * i);
    out(1, i) = pos(t, 2 * i + 1);
  }
  return out;
}

// Fills row u (u >= 1) of the position matrix: displacement into frame u is
// the model velocity on features at frame max(0, u - lag) plus noise, and the
// result is clamped to the arena.
void advance_frame(Eigen::MatrixXd& pos, const ScenarioSpec& spec, int u) {
  const int n = spec.num_individuals;
  const int feature_frame = std::max(0, u - spec.lag_frames);
  const Eigen::Matrix2Xd feats = frame_positions(pos, feature_frame, n);
  const PlantedParams& prm = params_at(spec, u);
  for (int i = 0; i < n; ++i) {
    Vec2 v = model_velocity(prm, feats, spec.stimulus, feature_frame, i);
    if (spec.noise_sigma > 0.0)
      v += spec.noise_sigma *
           rng::gaussian_pair(spec.seed, static_cast<std::uint64_t>(i),
                              static_cast<std::uint64_t>(u));
    const Vec2 prev(pos(u - 1, 2 * i), pos(u - 1, 2 * i + 1));
    const Vec2 next = clamp_to(spec.arena, prev + v);
    pos(u, 2 * i) = next.x();
    pos(u, 2 * i + 1) = next.y();
  }
}

void validate_params(const PlantedParams& p, int n, const std::string& name) {
  if (p.weights.rows() != n || p.weights.cols() != n ||
      p.stim_weights.size() != n || p.preferred_dirs.cols() != n)
    throw ConfigError("simulator: parameter shape mismatch in scenario '" +
                      name + "'");
  if ((p.weights.array() < 0.0).any() || (p.stim_weights.array() < 0.0).any())
    throw ConfigError("simulator: negative planted weight in scenario '" +
                      name + "'");
  for (int i = 0; i < n; ++i) {
    const double mag = p.weights(i, i);
    const double dn = p.preferred_dirs.col(i).norm();
    if (mag > 0.0 && std::abs(dn - 1.0) > 1e-9)
      throw ConfigError(
          "simulator: planted preferred direction must be unit-norm when the "
          "autonomous magnitude is positive (scenario '" +
          name + "')");
    if (mag == 0.0 && dn != 0.0)
      throw ConfigError(
          "simulator: planted preferred direction must be zero when the "
          "autonomous magnitude is zero (scenario '" +
          name + "')");
  }
}

PlantedParams zero_params(int n) {
  PlantedParams p;
  p.weights = Eigen::MatrixXd::Zero(n, n);
  p.stim_weights = Eigen::VectorXd::Zero(n);
  p.preferred_dirs = Eigen::Matrix2Xd::Zero(2, n);
  return p;
}

// Uniform all-pairs attraction plus optional homogeneous stimulus weight.
PlantedParams uniform_params(int n, double attraction, double stim) {
  PlantedParams p = zero_params(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) p.weights(i, j) = attraction;
  p.stim_weights.setConstant(stim);
  return p;
}

// Weak all-pairs attraction with one strong pursuit edge per individual
// (i chases i+1, ring topology). Cyclic pursuit keeps the group milling
// instead of settling into a static equilibrium where every feature
// direction would be frozen.
PlantedParams ring_params(int n, double base, double ring_extra,
                          double stim) {
  PlantedParams p = uniform_params(n, base, stim);
  for (int i = 0; i < n; ++i) p.weights(i, (i + 1) % n) += ring_extra;
  return p;
}

// Unit directions at angles 2*pi*i/n; they sum to zero, so a school driven by
// them does not drift as a whole.
Eigen::Matrix2Xd balanced_dirs(int n) {
  Eigen::Matrix2Xd d(2, n);
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    d(0, i) = std::cos(a);
    d(1, i) = std::sin(a);
  }
  return d;
}

void set_autonomous(PlantedParams& p, double magnitude,
                    const Eigen::Matrix2Xd& dirs) {
  for (int i = 0; i < p.weights.rows(); ++i) {
    p.weights(i, i) = magnitude;
    p.preferred_dirs.col(i) =
        magnitude > 0.0 ? Vec2(dirs.col(i)) : Vec2(Vec2::Zero());
  }
}

ScenarioSpec base_scenario(std::string name, std::uint64_t seed) {
  ScenarioSpec s;
  s.name = std::move(name);
  s.num_individuals = 5;
  s.num_frames = 2000;
  s.lag_frames = 3;
  s.seed = seed;
  s.arena = Arena{Vec2(0.0, 0.0), Vec2(40.0, 40.0)};
  s.frame_period = 1.0 / 60.0;
  s.length_unit = "cm";
  // Loose ring around the arena center; radii and phases are deliberately
  // uneven so no pair of trajectories is related by an exact symmetry.
  const Vec2 center(20.0, 20.0);
  const double radii[5] = {7.5, 8.2, 6.9, 8.8, 7.1};
  const double phases[5] = {0.3, 1.7, 2.9, 4.1, 5.4};
  s.initial_positions.resize(2, 5);
  for (int i = 0; i < 5; ++i) {
    s.initial_positions(0, i) = center.x() + radii[i] * std::cos(phases[i]);
    s.initial_positions(1, i) = center.y() + radii[i] * std::sin(phases[i]);
  }
  return s;
}

void set_constant_schedule(ScenarioSpec& s, PlantedParams params) {
  s.schedule.clear();
  s.schedule.push_back(ScheduleEntry{0, s.num_frames, std::move(params)});
}

// Replaces the initial positions with the state reached after a noiseless
// burn-in of the first regime, so every window of the scenario proper sees
// the group's settled geometry rather than the smooth start-up transient
// (whose nearly constant feature directions make windows ill-conditioned).
void warm_start(ScenarioSpec& s, int burn_in_frames) {
  ScenarioSpec warm = s;
  warm.noise_sigma = 0.0;
  warm.num_frames = burn_in_frames + 1;
  warm.schedule.clear();
  warm.schedule.push_back(
      ScheduleEntry{0, warm.num_frames, s.schedule.front().params});
  const TrajectoryDataset burn =
      simulate(warm, warm.num_frames).dataset;
  for (int i = 0; i < s.num_individuals; ++i)
    s.initial_positions.col(i) = burn.position(burn_in_frames, i);
}

}  // namespace

void validate_scenario(const ScenarioSpec& spec) {
  const int n = spec.num_individuals;
  if (n < 2) throw ConfigError("simulator: scenario needs >= 2 individuals");
  if (spec.num_frames < 2)
    throw ConfigError("simulator: scenario needs >= 2 frames");
  if (spec.lag_frames < 1)
    throw ConfigError("simulator: lag_frames must be >= 1");
  if (spec.noise_sigma < 0.0)
    throw ConfigError("simulator: noise_sigma must be >= 0");
  if (spec.initial_positions.cols() != n)
    throw ConfigError("simulator: initial positions shape mismatch");
  if (!(spec.arena.lo.x() < spec.arena.hi.x() &&
        spec.arena.lo.y() < spec.arena.hi.y()))
    throw ConfigError("simulator: arena box is empty");
  for (int i = 0; i < n; ++i) {
    const Vec2 p = spec.initial_positions.col(i);
    if (p.x() < spec.arena.lo.x() || p.x() > spec.arena.hi.x() ||
        p.y() < spec.arena.lo.y() || p.y() > spec.arena.hi.y())
      throw ConfigError("simulator: initial position outside the arena");
  }
  if (spec.schedule.empty())
    throw ConfigError("simulator: empty ground-truth schedule");
  std::vector<ScheduleEntry const*> sorted;
  for (const auto& e : spec.schedule) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](auto* a, auto* b) { return a->frame_begin < b->frame_begin; });
  int expect = 0;
  for (const auto* e : sorted) {
    if (e->frame_begin != expect)
      throw ConfigError(
          "simulator: ground-truth schedule has a gap or overlap at frame " +
          std::to_string(expect));
    if (e->frame_end <= e->frame_begin)
      throw ConfigError("simulator: empty schedule entry");
    validate_params(e->params, n, spec.name);
    expect = e->frame_end;
  }
  if (expect != spec.num_frames)
    throw ConfigError("simulator: schedule does not cover all frames");
}

const PlantedParams& params_at(const ScenarioSpec& spec, int frame) {
  for (const auto& e : spec.schedule)
    if (frame >= e.frame_begin && frame < e.frame_end) return e.params;
  throw ConfigError("simulator: frame " + std::to_string(frame) +
                    " not covered by the schedule");
}

Vec2 model_velocity(const PlantedParams& params,
                    const Eigen::Matrix2Xd& positions,
                    const StimulusField& field, int frame, int i) {
  const int n = static_cast<int>(positions.cols());
  const Vec2 pi = positions.col(i);
  Vec2 v = Vec2::Zero();
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const double w = params.weights(i, j);
    if (w != 0.0) v += w * unit_direction(pi, Vec2(positions.col(j)));
  }
  v += params.weights(i, i) * params.preferred_dirs.col(i);
  const double ws = params.stim_weights(i);
  if (ws != 0.0) v += ws * stimulus_direction(field, pi, frame);
  return v;
}

Eigen::Matrix2Xd step(const Eigen::MatrixXd& known, const ScenarioSpec& spec,
                      int t) {
  if (t < 0 || known.rows() <= t)
    throw std::out_of_range("simulator: step requires positions up to frame t");
  const int n = spec.num_individuals;
  const int target = t + spec.lag_frames;
  Eigen::MatrixXd buf(target + 1, 2 * n);
  buf.topRows(t + 1) = known.topRows(t + 1);
  for (int u = t + 1; u <= target; ++u) advance_frame(buf, spec, u);
  return frame_positions(buf, target, n);
}

SimulationResult simulate(const ScenarioSpec& spec, int window_len) {
  validate_scenario(spec);
  const int n = spec.num_individuals;
  const int frames = spec.num_frames;

  SimulationResult result;
  result.dataset =
      make_dataset(n, frames, spec.frame_period, spec.length_unit);
  Eigen::MatrixXd& pos = result.dataset.positions;
  for (int i = 0; i < n; ++i) {
    pos(0, 2 * i) = spec.initial_positions(0, i);
    pos(0, 2 * i + 1) = spec.initial_positions(1, i);
  }
  for (int u = 1; u < frames; ++u) advance_frame(pos, spec, u);

  result.truth.num_individuals = n;
  result.truth.window_len = window_len;
  result.truth.lag_frames = spec.lag_frames;
  const int windows = num_windows(frames, window_len, spec.lag_frames);
  for (int k = 0; k < windows; ++k) {
    const PlantedParams& prm =
        params_at(spec, window_center_frame(k, window_len, spec.lag_frames));
    WindowEstimate est;
    est.window_index = k;
    est.weights = prm.weights;
    est.stim_weights = prm.stim_weights;
    est.preferred_dirs = prm.preferred_dirs;
    result.truth.windows.push_back(std::move(est));
  }
  return result;
}

void resize_scenario(ScenarioSpec& spec, int num_frames) {
  if (num_frames < 2)
    throw ConfigError("simulator: scenario needs >= 2 frames");
  const long old_frames = spec.num_frames;
  std::vector<ScheduleEntry> resized;
  for (auto& e : spec.schedule) {
    const int begin =
        static_cast<int>(e.frame_begin * static_cast<long>(num_frames) /
                         old_frames);
    const int end = static_cast<int>(
        e.frame_end * static_cast<long>(num_frames) / old_frames);
    if (end > begin)
      resized.push_back(ScheduleEntry{begin, end, std::move(e.params)});
  }
  if (!resized.empty()) resized.back().frame_end = num_frames;
  spec.schedule = std::move(resized);
  spec.num_frames = num_frames;
}

std::vector<ScenarioSpec> builtin_scenarios() {
  std::vector<ScenarioSpec> out;
  const Vec2 center(20.0, 20.0);
  const Eigen::Matrix2Xd spread = balanced_dirs(5);

  {
    // Homogeneous stimulus following: every individual couples strongly to
    // the rotating pattern, with weak mutual attraction keeping the group
    // together.
    ScenarioSpec s = base_scenario("stim-follow", 101);
    s.stimulus =
        StimulusField::rotating(center, kSpeedFast, RotationSense::clockwise);
    set_constant_schedule(s, uniform_params(5, 0.05, 0.20));
    warm_start(s, 200);
    out.push_back(std::move(s));
  }
  {
    // Free schooling, no stimulus response. The rotating field is still
    // attached so the estimator has a stimulus regressor to reject, matching
    // how a control condition is analyzed.
    ScenarioSpec s = base_scenario("free-school", 202);
    s.stimulus =
        StimulusField::rotating(center, kSpeedSlow, RotationSense::clockwise);
    // Pursuit edge (0.02 + 0.15) strictly dominates the worst-case sum of
    // the remaining terms (3 * 0.02 + 0.05), so the group can never settle
    // into a static equilibrium.
    PlantedParams p = ring_params(5, 0.02, 0.15, 0.0);
    set_autonomous(p, 0.05, spread);
    set_constant_schedule(s, p);
    warm_start(s, 200);
    out.push_back(std::move(s));
  }
  {
    // Mid-run regime switch: stimulus-driven first half, internally
    // coordinated second half. Attraction is identical in both regimes.
    ScenarioSpec s = base_scenario("decouple", 303);
    s.stimulus =
        StimulusField::rotating(center, kSpeedFast, RotationSense::clockwise);
    // Attraction is identical in both regimes; only the stimulus and
    // autonomous magnitudes swap dominance.
    PlantedParams driven = ring_params(5, 0.02, 0.22, 0.25);
    set_autonomous(driven, 0.03, spread);
    PlantedParams internal = ring_params(5, 0.02, 0.22, 0.05);
    set_autonomous(internal, 0.10, spread);
    const int half = s.num_frames / 2;
    s.schedule.push_back(ScheduleEntry{0, half, std::move(driven)});
    s.schedule.push_back(
        ScheduleEntry{half, s.num_frames, std::move(internal)});
    warm_start(s, 200);
    out.push_back(std::move(s));
  }
  {
    // One individual (index 1, csv id 2) circles with the stimulus while the
    // rest are strongly attracted to it and weakly to each other, planting a
    // clear influence asymmetry.
    ScenarioSpec s = base_scenario("leader", 404);
    s.stimulus = StimulusField::rotating(center, kSpeedMedium,
                                         RotationSense::clockwise);
    const int leader = 1;
    PlantedParams p = zero_params(5);
    for (int i = 0; i < 5; ++i) {
      if (i == leader) continue;
      for (int j = 0; j < 5; ++j) {
        if (j == i) continue;
        p.weights(i, j) = (j == leader) ? 0.25 : 0.06;
      }
    }
    p.stim_weights(leader) = 0.20;
    set_constant_schedule(s, p);
    warm_start(s, 200);
    out.push_back(std::move(s));
  }
  {
    // Graded stimulus weights with relative shares 0.4/0.3/0.2/0.1/0;
    // attraction drags the non-responsive individual along.
    ScenarioSpec s = base_scenario("hetero-stim", 505);
    s.stimulus = StimulusField::rotating(center, kSpeedMedium,
                                         RotationSense::clockwise);
    PlantedParams p = uniform_params(5, 0.06, 0.0);
    p.stim_weights << 0.20, 0.15, 0.10, 0.05, 0.0;
    set_constant_schedule(s, p);
    warm_start(s, 200);
    out.push_back(std::move(s));
  }

  for (const auto& s : out) validate_scenario(s);
  return out;
}

ScenarioSpec find_scenario(const std::string& name) {
  for (auto& s : builtin_scenarios())
    if (s.name == name) return s;
  std::string names;
  for (const auto& s : builtin_scenarios())
    names += (names.empty() ? "" : ", ") + s.name;
  throw ConfigError("simulator: unknown scenario '" + name +
                    "' (available: " + names + ")");
}

}  // namespace swarmnet
