#pragma once

// Schooling indices over an estimate series: group-level coefficient sums,
// per-individual influence, normalized component shares, and the two
// normalized entropies of time-averaged relative weight.

#include "swarmnet/core.hpp"

#include <optional>
#include <vector>

namespace swarmnet {

/// Sum of all off-diagonal response weights.
double coordination_strength(const WindowEstimate& est);

/// Sum of all stimulus weights.
double stimulus_responsiveness(const WindowEstimate& est);

/// Sum of the autonomous magnitudes (the weight-matrix diagonal).
double autonomous_sum(const WindowEstimate& est);

/// Total weight of edges originating from i: how strongly i drives the rest
/// of the group (column sum of the weight matrix, diagonal excluded).
double individual_influence(const WindowEstimate& est, int i);

struct ComponentShares {
  double attraction = 0.0;
  double stimulus = 0.0;
  double autonomous = 0.0;
  bool defined = false;  // false when the three components sum below kShareEps
};

/// Relative contribution of the attraction, stimulus, and autonomous
/// components to individual i's fitted motion; the defined row sums to 1.
ComponentShares component_shares(const WindowEstimate& est, int i);

struct WindowIndices {
  int window_index = 0;
  double s_att = 0.0;
  double s_stim = 0.0;
  double s_auto = 0.0;
  Eigen::VectorXd influence;           // one entry per individual
  std::vector<ComponentShares> shares; // one row per individual
};

struct IndexSeries {
  std::vector<WindowIndices> windows;
  int num_individuals = 0;

  int undefined_share_rows() const;
};

IndexSeries compute_indices(const EstimateSeries& series);

struct EntropyReport {
  std::optional<double> h_influ;  // unset when every window was skipped
  std::optional<double> h_stim;
  Eigen::VectorXd r_bar;       // time-averaged relative influence (empty when
                               // h_influ is unset)
  Eigen::VectorXd r_bar_stim;  // same for stimulus weights
  int skipped_windows_influence = 0;
  int skipped_windows_stim = 0;
  int total_windows = 0;
};

/// Normalized entropy -sum_i s_i * log_N(s_i) of a share vector that sums to
/// 1; zero terms contribute nothing. Result clamped to [0, 1] against
/// roundoff.
double normalized_entropy(const Eigen::VectorXd& shares);

/// Per window, individual influences are normalized to relative shares
/// (windows whose total falls below kShareEps are skipped), time-averaged,
/// and reduced to the base-N entropy. The report also carries the analogous
/// entropy of the stimulus weights.
EntropyReport influence_entropy(const EstimateSeries& series);

/// Stimulus-weight entropy alone; unset when every window was skipped.
std::optional<double> stim_entropy(const EstimateSeries& series);

}  // namespace swarmnet
