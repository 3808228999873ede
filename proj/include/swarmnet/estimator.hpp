#pragma once

// Inverse problem: per individual and per sliding window, fit the
// non-negative neighbor weights, stimulus weight, and free autonomous vector
// of the interaction model by penalized constrained least squares.

#include "swarmnet/core.hpp"

#include <utility>
#include <vector>

namespace swarmnet {

/// Regression problem for one (individual, window) pair.
///
/// Rows come in pairs, one (x, y) pair per sample frame t in the window:
/// the target is the displacement realized lag_frames after t, and the
/// penalized feature columns are the unit directions toward each neighbor
/// (ascending id) followed by the stimulus direction, all evaluated at t.
/// The free autonomous 2-vector acts as a per-component intercept; it is
/// solved in closed form by the fitter and not stored as explicit columns.
struct DesignMatrix {
  Eigen::MatrixXd features;       // (2 * samples) x (neighbors + 1)
  Eigen::VectorXd target;         // 2 * samples
  std::vector<int> neighbor_ids;  // ascending, excludes the focal individual
  int samples = 0;

  int num_penalized() const { return static_cast<int>(features.cols()); }
};

struct FitResult {
  Eigen::VectorXd weights_row;  // neighbor weights, aligned with neighbor_ids
  double stim_weight = 0.0;
  Vec2 autonomous_vec = Vec2::Zero();  // unpenalized free vector b
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

DesignMatrix build_design(const TrajectoryDataset& dataset,
                          const StimulusField& field, int individual,
                          int window_start, const EstimatorConfig& config);

/// Smallest penalty at which every penalized coefficient is zero: the largest
/// positive correlation between a feature column and the residual of the
/// autonomous-only fit. (Negative correlations cannot activate a coefficient
/// constrained to be non-negative.)
double lambda_max(const DesignMatrix& design);

/// Minimizes 0.5 * ||target - features * w - B b||^2 + lambda * sum(w)
/// subject to w >= 0, with b in R^2 free and unpenalized, by cyclic projected
/// coordinate descent with an exact closed-form b update each sweep.
FitResult fit_window(const DesignMatrix& design, double lambda, double tol,
                     int max_iters);

/// Splits the fitted free vector into (magnitude, unit direction); both zero
/// when the magnitude falls below kCoincidentEps.
std::pair<double, Vec2> decompose_autonomous(const Vec2& b);

/// Penalty actually applied for one design under the config's lambda rule.
double resolve_lambda(const EstimatorConfig& config, const DesignMatrix& design);

/// Fits every individual over every sliding window (step 1). Per-window fits
/// run on a worker pool capped by the SWARM_THREADS environment variable
/// (unset or 0 = hardware concurrency); assembly is deterministic regardless
/// of the thread count.
EstimateSeries estimate_series(const TrajectoryDataset& dataset,
                               const StimulusField& field,
                               const EstimatorConfig& config);

}  // namespace swarmnet
