#include "swarmnet/core.hpp"

namespace swarmnet {

const char* ingest_code_name(IngestCode code) {
  switch (code) {
    case IngestCode::bad_header:
      return "bad_header";
    case IngestCode::bad_row:
      return "bad_row";
    case IngestCode::duplicate_sample:
      return "duplicate_sample";
    case IngestCode::non_contiguous_ids:
      return "non_contiguous_ids";
    case IngestCode::oversized_gap:
      return "oversized_gap";
    case IngestCode::incomplete_coverage:
      return "incomplete_coverage";
    case IngestCode::too_small:
      return "too_small";
  }
  return "unknown";
}

TrajectoryDataset make_dataset(int num_individuals, int num_frames,
                               double frame_period, std::string length_unit) {
  TrajectoryDataset ds;
  ds.num_individuals = num_individuals;
  ds.num_frames = num_frames;
  ds.positions = Eigen::MatrixXd::Zero(num_frames, 2 * num_individuals);
  ds.frame_period = frame_period;
  ds.length_unit = std::move(length_unit);
  return ds;
}

void validate_dataset(const TrajectoryDataset& ds) {
  if (ds.num_individuals < 2)
    throw InputError("core: dataset needs at least 2 individuals");
  if (ds.num_frames < 2)
    throw InputError("core: dataset needs at least 2 frames");
  if (ds.positions.rows() != ds.num_frames ||
      ds.positions.cols() != 2 * ds.num_individuals)
    throw InputError("core: position matrix shape does not match metadata");
  if (!(ds.frame_period > 0.0))
    throw InputError("core: frame_period must be positive");
  if (!ds.positions.allFinite())
    throw InputError("core: positions contain non-finite values");
}

WindowEstimate make_window_estimate(int num_individuals, int window_index) {
  WindowEstimate est;
  est.window_index = window_index;
  est.weights = Eigen::MatrixXd::Zero(num_individuals, num_individuals);
  est.stim_weights = Eigen::VectorXd::Zero(num_individuals);
  est.preferred_dirs = Eigen::Matrix2Xd::Zero(2, num_individuals);
  return est;
}

void validate_window_estimate(const WindowEstimate& est) {
  const int n = est.n();
  if (n < 2 || est.weights.rows() != n || est.weights.cols() != n ||
      est.preferred_dirs.cols() != n)
    throw InputError("core: window estimate shape mismatch");
  if (!est.weights.allFinite() || !est.stim_weights.allFinite() ||
      !est.preferred_dirs.allFinite())
    throw InputError("core: window estimate contains non-finite values");
  if ((est.weights.array() < 0.0).any() ||
      (est.stim_weights.array() < 0.0).any())
    throw InputError("core: window estimate has negative weights");
  for (int i = 0; i < n; ++i) {
    const double mag = est.weights(i, i);
    const double dn = est.preferred_dirs.col(i).norm();
    if (mag > 0.0 && std::abs(dn - 1.0) > 1e-9)
      throw InputError(
          "core: preferred direction must be unit-norm when the autonomous "
          "magnitude is positive");
    if (mag == 0.0 && dn != 0.0)
      throw InputError(
          "core: preferred direction must be zero when the autonomous "
          "magnitude is zero");
  }
}

void validate_estimator_config(const EstimatorConfig& c) {
  if (c.lag_frames < 1) throw ConfigError("config: lag_frames must be >= 1");
  if (c.window_len <= c.lag_frames)
    throw ConfigError("config: window_len must exceed lag_frames");
  if (c.lambda < 0.0) throw ConfigError("config: lambda must be >= 0");
  if (!(c.solver_tol > 0.0))
    throw ConfigError("config: solver_tol must be > 0");
  if (c.max_iters <= 0) throw ConfigError("config: max_iters must be > 0");
}

}  // namespace swarmnet
