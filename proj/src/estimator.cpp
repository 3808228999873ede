#include "swarmnet/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace swarmnet {

namespace {

// Sufficient statistics with the free autonomous vector eliminated: for any
// fixed w the optimal b is the per-component residual mean, so the problem
// reduces to a non-negative lasso on per-component-centered columns. The
// centered Gram matrix makes one coordinate sweep O(m^2) regardless of the
// window length, and removing b from the iteration avoids the slow zigzag
// between the intercept and near-constant feature columns.
struct CenteredGram {
  Eigen::MatrixXd gram;        // Ac^T Ac, Ac = A with per-component col means
                               // removed
  Eigen::VectorXd corr;        // Ac^T yc
  Eigen::VectorXd col_mean_x;  // per column, mean over samples of the x rows
  Eigen::VectorXd col_mean_y;
  double y_mean_x = 0.0;
  double y_mean_y = 0.0;
  int samples = 0;

  explicit CenteredGram(const DesignMatrix& d) {
    const int m = d.num_penalized();
    samples = d.samples;
    col_mean_x.resize(m);
    col_mean_y.resize(m);
    using StrideMap =
        Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<2>>;
    for (int j = 0; j < m; ++j) {
      StrideMap xs(d.features.col(j).data(), samples);
      StrideMap ys(d.features.col(j).data() + 1, samples);
      col_mean_x(j) = xs.mean();
      col_mean_y(j) = ys.mean();
    }
    StrideMap tx(d.target.data(), samples);
    StrideMap ty(d.target.data() + 1, samples);
    y_mean_x = tx.mean();
    y_mean_y = ty.mean();

    gram = d.features.transpose() * d.features;
    gram.noalias() -= samples * (col_mean_x * col_mean_x.transpose());
    gram.noalias() -= samples * (col_mean_y * col_mean_y.transpose());
    corr = d.features.transpose() * d.target;
    corr -= samples * (col_mean_x * y_mean_x + col_mean_y * y_mean_y);
  }

  Vec2 optimal_b(const Eigen::VectorXd& w) const {
    return Vec2(y_mean_x - col_mean_x.dot(w), y_mean_y - col_mean_y.dot(w));
  }
};

double objective_of(const DesignMatrix& d, const Eigen::VectorXd& w,
                    const Vec2& b, double lambda) {
  Eigen::VectorXd r = d.target - d.features * w;
  for (int s = 0; s < d.samples; ++s) {
    r(2 * s) -= b.x();
    r(2 * s + 1) -= b.y();
  }
  return 0.5 * r.squaredNorm() + lambda * w.sum();
}

int thread_budget(int jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned want = hw;
  if (const char* env = std::getenv("SWARM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0) {
      std::fprintf(stderr,
                   "swarmnet: ignoring invalid SWARM_THREADS value '%s'\n",
                   env);
    } else if (v > 0) {
      want = std::min<unsigned>(want, static_cast<unsigned>(v));
    }
  }
  return static_cast<int>(std::min<unsigned>(want, std::max(jobs, 1)));
}

}  // namespace

DesignMatrix build_design(const TrajectoryDataset& ds,
                          const StimulusField& field, int individual,
                          int window_start, const EstimatorConfig& cfg) {
  validate_estimator_config(cfg);
  const int n = ds.num_individuals;
  const int lag = cfg.lag_frames;
  const int len = cfg.window_len;
  if (individual < 0 || individual >= n)
    throw std::out_of_range("estimator: individual index out of range");
  if (window_start < 0 ||
      window_start > ds.num_frames - len - lag)
    throw std::out_of_range("estimator: window out of range");

  DesignMatrix d;
  d.samples = len - lag;
  for (int j = 0; j < n; ++j)
    if (j != individual) d.neighbor_ids.push_back(j);
  const int m = n;  // (n - 1) neighbors + stimulus
  d.features.resize(2 * d.samples, m);
  d.target.resize(2 * d.samples);

  for (int s = 0; s < d.samples; ++s) {
    const int t = window_start + s;
    const Vec2 pi = ds.position(t, individual);
    for (int c = 0; c < n - 1; ++c) {
      const Vec2 f = unit_direction(pi, ds.position(t, d.neighbor_ids[c]));
      d.features(2 * s, c) = f.x();
      d.features(2 * s + 1, c) = f.y();
    }
    const Vec2 sd = stimulus_direction(field, pi, t);
    d.features(2 * s, m - 1) = sd.x();
    d.features(2 * s + 1, m - 1) = sd.y();
    // The model's velocity at frame t + lag is the displacement into that
    // frame; the forward difference at t + lag - 1 is exactly that, while the
    // central scheme straddles the frame as a smoothed alternative.
    const Vec2 v = cfg.velocity_scheme == VelocityScheme::forward
                       ? velocity(ds, individual, t + lag - 1,
                                  VelocityScheme::forward)
                       : velocity(ds, individual, t + lag,
                                  VelocityScheme::central);
    d.target(2 * s) = v.x();
    d.target(2 * s + 1) = v.y();
  }
  return d;
}

double lambda_max(const DesignMatrix& d) {
  if (d.samples <= 0) throw InputError("estimator: empty design");
  const CenteredGram g(d);
  double lam = 0.0;
  for (int j = 0; j < d.num_penalized(); ++j) lam = std::max(lam, g.corr(j));
  return lam;
}

FitResult fit_window(const DesignMatrix& d, double lambda, double tol,
                     int max_iters) {
  if (d.samples <= 0 || d.target.size() == 0)
    throw InputError("estimator: empty design");
  if (!d.features.allFinite() || !d.target.allFinite())
    throw InputError("estimator: non-finite values in design");
  if (lambda < 0.0) throw ConfigError("estimator: lambda must be >= 0");
  if (!(tol > 0.0) || max_iters <= 0)
    throw ConfigError("estimator: invalid solver settings");

  const int m = d.num_penalized();
  const GramCache g(d);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd gram_w = Eigen::VectorXd::Zero(m);  // (A^T A) w
  double wa_mean_x = 0.0, wa_mean_y = 0.0;  // per-component means of A w
  Vec2 b(g.y_mean_x, g.y_mean_y);           // autonomous-only start

  FitResult res;
#ifndef NDEBUG
  double prev_obj = objective_of(d, w, b, lambda);
#endif
  for (int it = 0; it < max_iters; ++it) {
    double max_delta = 0.0;
    for (int j = 0; j < m; ++j) {
      if (g.col_sq(j) <= 0.0) continue;  // zero column (coincident/no field)
      const double rho = g.corr(j) -
                         g.samples * (g.col_mean_x(j) * b.x() +
                                      g.col_mean_y(j) * b.y()) -
                         gram_w(j) + g.col_sq(j) * w(j);
      const double wj = std::max(0.0, (rho - lambda) / g.col_sq(j));
      const double delta = wj - w(j);
      if (delta != 0.0) {
        gram_w += delta * g.gram.col(j);
        wa_mean_x += delta * g.col_mean_x(j);
        wa_mean_y += delta * g.col_mean_y(j);
        w(j) = wj;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    const Vec2 b_new(g.y_mean_x - wa_mean_x, g.y_mean_y - wa_mean_y);
    max_delta = std::max(max_delta, (b_new - b).cwiseAbs().maxCoeff());
    b = b_new;
    res.iterations = it + 1;
#ifndef NDEBUG
    const double obj = objective_of(d, w, b, lambda);
    assert(obj <= prev_obj + 1e-10 * std::max(1.0, std::abs(prev_obj)) &&
           "coordinate descent objective must not increase");
    prev_obj = obj;
#endif
    if (max_delta < tol) {
      res.converged = true;
      break;
    }
  }

  res.weights_row = w.head(m - 1);
  res.stim_weight = w(m - 1);
  res.autonomous_vec = b;
  res.objective = objective_of(d, w, b, lambda);
  return res;
}

std::pair<double, Vec2> decompose_autonomous(const Vec2& b) {
  const double n = b.norm();
  if (n < kCoincidentEps) return {0.0, Vec2::Zero()};
  return {n, Vec2(b / n)};
}

double resolve_lambda(const EstimatorConfig& cfg, const DesignMatrix& d) {
  if (cfg.lambda_rule == LambdaRule::absolute) return cfg.lambda;
  return cfg.lambda * lambda_max(d);
}

EstimateSeries estimate_series(const TrajectoryDataset& ds,
                               const StimulusField& field,
                               const EstimatorConfig& cfg) {
  validate_dataset(ds);
  validate_estimator_config(cfg);
  const int n = ds.num_individuals;
  const int windows = num_windows(ds.num_frames, cfg.window_len,
                                  cfg.lag_frames);
  if (windows < 1)
    throw InputError(
        "estimator: dataset too short; needs at least window_len + "
        "lag_frames = " +
        std::to_string(cfg.window_len + cfg.lag_frames) + " frames");
  if (cfg.window_len < 2 * (n + 1))
    std::fprintf(stderr,
                 "swarmnet: window_len=%d is short for %d individuals; "
                 ">= %d recommended\n",
                 cfg.window_len, n, 2 * (n + 1));

  EstimateSeries series;
  series.num_individuals = n;
  series.window_len = cfg.window_len;
  series.lag_frames = cfg.lag_frames;
  series.windows.resize(windows);

  auto fit_one_window = [&](int k) {
    WindowEstimate est = make_window_estimate(n, k);
    for (int i = 0; i < n; ++i) {
      const DesignMatrix d = build_design(ds, field, i, k, cfg);
      const FitResult fit =
          fit_window(d, resolve_lambda(cfg, d), cfg.solver_tol, cfg.max_iters);
      for (int c = 0; c < n - 1; ++c)
        est.weights(i, d.neighbor_ids[c]) = fit.weights_row(c);
      est.stim_weights(i) = fit.stim_weight;
      const auto [mag, dir] = decompose_autonomous(fit.autonomous_vec);
      est.weights(i, i) = mag;
      est.preferred_dirs.col(i) = dir;
    }
    series.windows[k] = std::move(est);
  };

  const int threads = thread_budget(windows);
  if (threads <= 1) {
    for (int k = 0; k < windows; ++k) fit_one_window(k);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
      try {
        for (int k = next.fetch_add(1); k < windows; k = next.fetch_add(1))
          fit_one_window(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(windows);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  return series;
}

}  // namespace swarmnet
