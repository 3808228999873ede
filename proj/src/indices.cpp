#include "swarmnet/indices.hpp"

#include <algorithm>
#include <cmath>

namespace swarmnet {

namespace {

// Shared accumulation for the two entropy variants: per-window weight vectors
// are normalized (or skipped when degenerate), time-averaged, then reduced.
template <typename WeightFn>
void entropy_accumulate(const EstimateSeries& series, WeightFn&& weight_of,
                        std::optional<double>& h, Eigen::VectorXd& r_bar,
                        int& skipped) {
  const int n = series.num_individuals;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  int kept = 0;
  Eigen::VectorXd v(n);
  for (const auto& est : series.windows) {
    for (int i = 0; i < n; ++i) v(i) = weight_of(est, i);
    const double total = v.sum();
    if (total < kShareEps) {
      ++skipped;
      continue;
    }
    sum += v / total;
    ++kept;
  }
  if (kept == 0) {
    h.reset();
    r_bar.resize(0);
    return;
  }
  r_bar = sum / kept;
  h = normalized_entropy(r_bar);
}

}  // namespace

double individual_influence(const WindowEstimate& est, int i) {
  const int n = est.n();
  if (i < 0 || i >= n)
    throw std::out_of_range("indices: individual index out of range");
  double s = 0.0;
  for (int j = 0; j < n; ++j)
    if (j != i) s += est.weights(j, i);
  return s;
}

double coordination_strength(const WindowEstimate& est) {
  // Accumulated as the sum of per-individual influences so the identity
  // sum_i I_i == S_att holds bit-for-bit, not just mathematically.
  double s = 0.0;
  for (int i = 0; i < est.n(); ++i) s += individual_influence(est, i);
  return s;
}

double stimulus_responsiveness(const WindowEstimate& est) {
  return est.stim_weights.sum();
}

double autonomous_sum(const WindowEstimate& est) {
  return est.weights.diagonal().sum();
}

ComponentShares component_shares(const WindowEstimate& est, int i) {
  const int n = est.n();
  if (i < 0 || i >= n)
    throw std::out_of_range("indices: individual index out of range");
  double attraction = 0.0;
  for (int j = 0; j < n; ++j)
    if (j != i) attraction += est.weights(i, j);
  const double stimulus = est.stim_weights(i);
  const double autonomous = est.weights(i, i);
  const double total = attraction + stimulus + autonomous;
  ComponentShares out;
  if (total < kShareEps) return out;  // flagged undefined, not divided
  out.attraction = attraction / total;
  out.stimulus = stimulus / total;
  out.autonomous = autonomous / total;
  out.defined = true;
  return out;
}

int IndexSeries::undefined_share_rows() const {
  int count = 0;
  for (const auto& w : windows)
    for (const auto& s : w.shares)
      if (!s.defined) ++count;
  return count;
}

IndexSeries compute_indices(const EstimateSeries& series) {
  IndexSeries out;
  out.num_individuals = series.num_individuals;
  out.windows.reserve(series.windows.size());
  for (const auto& est : series.windows) {
    WindowIndices wi;
    wi.window_index = est.window_index;
    const int n = est.n();
    wi.influence.resize(n);
    for (int i = 0; i < n; ++i) wi.influence(i) = individual_influence(est, i);
    wi.s_att = coordination_strength(est);
    wi.s_stim = stimulus_responsiveness(est);
    wi.s_auto = autonomous_sum(est);
    wi.shares.reserve(n);
    for (int i = 0; i < n; ++i) wi.shares.push_back(component_shares(est, i));
    out.windows.push_back(std::move(wi));
  }
  return out;
}

double normalized_entropy(const Eigen::VectorXd& shares) {
  const int n = static_cast<int>(shares.size());
  if (n < 2) throw InputError("indices: entropy needs at least 2 shares");
  const double log_n = std::log(static_cast<double>(n));
  double h = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = shares(i);
    if (s > 0.0) h -= s * std::log(s) / log_n;
  }
  return std::clamp(h, 0.0, 1.0);
}

EntropyReport influence_entropy(const EstimateSeries& series) {
  if (series.windows.empty())
    throw InputError("indices: entropy of an empty series");
  EntropyReport rep;
  rep.total_windows = static_cast<int>(series.windows.size());
  entropy_accumulate(
      series,
      [](const WindowEstimate& e, int i) { return individual_influence(e, i); },
      rep.h_influ, rep.r_bar, rep.skipped_windows_influence);
  entropy_accumulate(
      series,
      [](const WindowEstimate& e, int i) { return e.stim_weights(i); },
      rep.h_stim, rep.r_bar_stim, rep.skipped_windows_stim);
  return rep;
}

std::optional<double> stim_entropy(const EstimateSeries& series) {
  return influence_entropy(series).h_stim;
}

}  // namespace swarmnet
