#pragma once

// Core domain types and geometric primitives for swarm interaction-network
// estimation: trajectory containers, stimulus fields, per-window parameter
// estimates, and the unit-direction / velocity kernels every other module
// consumes.
//
// All types are immutable value types once constructed and safe to share
// read-only across threads.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace swarmnet {

template <typename Scalar>
using Vec2T = Eigen::Matrix<Scalar, 2, 1>;
using Vec2 = Vec2T<double>;

// Two points closer than this are treated as coincident: direction features
// degrade to the zero vector instead of raising an error, so a momentary
// tracking collision only zeroes that neighbor's column for the affected
// samples.
inline constexpr double kCoincidentEps = 1e-9;

// Below this total weight, a normalization (component shares, relative
// influence) is undefined; the row or window is flagged and skipped rather
// than divided.
inline constexpr double kShareEps = 1e-12;

// ---------------------------------------------------------------------------
// Errors

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class IngestCode {
  bad_header,
  bad_row,
  duplicate_sample,
  non_contiguous_ids,
  oversized_gap,
  incomplete_coverage,
  too_small,
};

const char* ingest_code_name(IngestCode code);

struct IngestError : std::runtime_error {
  IngestCode code;
  IngestError(IngestCode c, const std::string& msg)
      : std::runtime_error(msg), code(c) {}
};

// ---------------------------------------------------------------------------
// Geometry

/// Unit vector from `from` to `to`; zero vector when the points coincide
/// (separation below kCoincidentEps).
template <typename DerivedA, typename DerivedB>
Vec2T<typename DerivedA::Scalar> unit_direction(
    const Eigen::MatrixBase<DerivedA>& from,
    const Eigen::MatrixBase<DerivedB>& to) {
  using S = typename DerivedA::Scalar;
  Vec2T<S> d = to.derived() - from.derived();
  const S n = d.norm();
  if (n < static_cast<S>(kCoincidentEps)) return Vec2T<S>::Zero();
  return Vec2T<S>(d / n);
}

enum class RotationSense { clockwise, counterclockwise };

/// Unit tangent of the circle through a point at `offset` from the rotation
/// center. Counterclockwise is positive in the standard mathematical
/// orientation (y up); zero vector at the center itself.
template <typename Derived>
Vec2T<typename Derived::Scalar> rotation_tangent(
    const Eigen::MatrixBase<Derived>& offset, RotationSense sense) {
  using S = typename Derived::Scalar;
  const S r = offset.norm();
  if (r < static_cast<S>(kCoincidentEps)) return Vec2T<S>::Zero();
  Vec2T<S> ccw(-offset.derived()(1) / r, offset.derived()(0) / r);
  return sense == RotationSense::counterclockwise ? ccw : Vec2T<S>(-ccw);
}

// ---------------------------------------------------------------------------
// Stimulus field

struct StimulusField {
  enum class Kind { none, rotating };

  Kind kind = Kind::none;
  Vec2 center = Vec2::Zero();
  // Angular speed of the projected pattern. The tangential direction at a
  // point does not depend on it; it is carried as scenario metadata.
  double angular_speed_deg_per_frame = 0.0;
  RotationSense sense = RotationSense::clockwise;

  static StimulusField none_field() { return {}; }

  static StimulusField rotating(const Vec2& center, double deg_per_frame,
                                RotationSense sense) {
    StimulusField f;
    f.kind = Kind::rotating;
    f.center = center;
    f.angular_speed_deg_per_frame = deg_per_frame;
    f.sense = sense;
    return f;
  }
};

/// Unit stimulus direction at a query position. Zero for the null field and
/// at the exact rotation center.
inline Vec2 stimulus_direction(const StimulusField& field, const Vec2& pos,
                               int /*frame*/ = 0) {
  if (field.kind == StimulusField::Kind::none) return Vec2::Zero();
  return rotation_tangent(Vec2(pos - field.center), field.sense);
}

// ---------------------------------------------------------------------------
// Trajectories

struct TrajectoryDataset {
  int num_individuals = 0;
  int num_frames = 0;
  // Row t holds (x_0, y_0, x_1, y_1, ...): column pair (2i, 2i+1) is
  // individual i. No missing entries; gaps are interpolated at ingestion.
  Eigen::MatrixXd positions;
  double frame_period = 1.0 / 60.0;  // seconds per frame
  std::string length_unit = "cm";

  Vec2 position(int t, int i) const {
    return Vec2(positions(t, 2 * i), positions(t, 2 * i + 1));
  }
  void set_position(int t, int i, const Vec2& p) {
    positions(t, 2 * i) = p.x();
    positions(t, 2 * i + 1) = p.y();
  }
};

TrajectoryDataset make_dataset(int num_individuals, int num_frames,
                               double frame_period = 1.0 / 60.0,
                               std::string length_unit = "cm");

/// Throws InputError unless sizes, finiteness and frame_period invariants
/// hold.
void validate_dataset(const TrajectoryDataset& dataset);

enum class VelocityScheme { forward, central };

/// Displacement per frame. forward: p(t+1) - p(t); central:
/// (p(t+1) - p(t-1)) / 2. The frame period is deliberately not divided out:
/// model coefficients stay in length units per frame.
inline Vec2 velocity(const TrajectoryDataset& ds, int i, int t,
                     VelocityScheme scheme) {
  if (i < 0 || i >= ds.num_individuals)
    throw std::out_of_range("core: individual index out of range");
  if (scheme == VelocityScheme::forward) {
    if (t < 0 || t + 1 >= ds.num_frames)
      throw std::out_of_range("core: frame out of range for forward velocity");
    return ds.position(t + 1, i) - ds.position(t, i);
  }
  if (t < 1 || t + 1 >= ds.num_frames)
    throw std::out_of_range("core: frame out of range for central velocity");
  return (ds.position(t + 1, i) - ds.position(t - 1, i)) / 2.0;
}

// ---------------------------------------------------------------------------
// Estimates

struct WindowEstimate {
  int window_index = 0;
  // weights(i, j), j != i: non-negative response weight of individual i
  // toward neighbor j. weights(i, i): magnitude of i's autonomous component.
  Eigen::MatrixXd weights;
  Eigen::VectorXd stim_weights;  // non-negative, one per individual
  // Column i: unit preferred direction, or the zero vector when
  // weights(i, i) == 0.
  Eigen::Matrix2Xd preferred_dirs;

  int n() const { return static_cast<int>(stim_weights.size()); }
};

WindowEstimate make_window_estimate(int num_individuals, int window_index = 0);

/// Throws InputError on shape mismatch, negative weights, or a preferred
/// direction inconsistent with its magnitude (unit within 1e-9 when the
/// diagonal weight is positive, zero otherwise).
void validate_window_estimate(const WindowEstimate& est);

struct EstimateSeries {
  std::vector<WindowEstimate> windows;  // sliding windows, step 1
  int num_individuals = 0;
  int window_len = 0;
  int lag_frames = 0;
};

/// Number of sliding windows a dataset of `num_frames` supports.
inline int num_windows(int num_frames, int window_len, int lag_frames) {
  return num_frames - window_len - lag_frames + 1;
}

/// Frame at the center of window k's full span (features plus lagged
/// targets); used to align planted ground truth with estimator windows.
inline int window_center_frame(int k, int window_len, int lag_frames) {
  return k + (window_len + lag_frames) / 2;
}

// ---------------------------------------------------------------------------
// Estimator configuration

enum class LambdaRule {
  absolute,          // use `lambda` as-is
  fraction_of_max,   // per fit, lambda * lambda_max(design)
};

struct EstimatorConfig {
  int lag_frames = 3;    // response lag tau_d, frames
  int window_len = 30;   // sliding-window length L, frames (0.5 s at 60 fps)
  double lambda = 0.05;  // sparsity penalty; interpretation set by lambda_rule
  LambdaRule lambda_rule = LambdaRule::fraction_of_max;
  double solver_tol = 1e-9;
  int max_iters = 2000;
  VelocityScheme velocity_scheme = VelocityScheme::forward;
};

/// Throws ConfigError on out-of-range fields (lag < 1, window <= lag,
/// lambda < 0, ...). The window-length recommendation (>= 2*(N+1) samples)
/// is enforced as a warning at estimation time, not here.
void validate_estimator_config(const EstimatorConfig& config);

inline bool is_unit_or_zero(const Vec2& v, double tol = 1e-9) {
  const double n = v.norm();
  return n <= tol || std::abs(n - 1.0) <= tol;
}

}  // namespace swarmnet
