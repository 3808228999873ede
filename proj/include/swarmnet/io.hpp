#pragma once

// Trajectory/config ingestion, plot-ready exports, and the end-to-end run
// pipeline behind the command-line front end.
//
// File formats:
//   trajectories.csv  header "frame,id,x,y"; frame 0-based, id 1-based
//   estimates.jsonl   one window per line: {"window", "weights" (row-major),
//                     "stim", "dirs"}
//   indices.csv       window,s_att,s_stim,s_auto,I_1..I_N
//   shares.csv        window,id,defined,c_att,c_stim,c_auto
//   networks.csv      window,i,j,w_ij (rows with w_ij >= threshold)
//   entropy.json      h_influ, h_stim, r_bar, r_bar_stim, skip counts
// All floats are serialized with 9 significant digits and every file is
// written atomically (temp + rename).

#include "swarmnet/core.hpp"
#include "swarmnet/indices.hpp"

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

namespace swarmnet {

struct IngestOptions {
  bool flip_y = false;  // reflect y within the data's own bounding box
  int max_gap = 5;      // longest per-id frame gap interpolation will bridge
  double fps = 60.0;
  std::string length_unit = "cm";
};

/// Reads a "frame,id,x,y" CSV into a gap-free dataset. Interior gaps up to
/// max_gap frames are filled by linear interpolation; anything worse is an
/// IngestError carrying a distinct code (see IngestCode).
TrajectoryDataset ingest_csv(const std::string& path,
                             const IngestOptions& options = {});

void write_trajectories_csv(const TrajectoryDataset& dataset,
                            const std::string& path);
void write_estimates_jsonl(const EstimateSeries& series,
                           const std::string& path);
EstimateSeries read_estimates_jsonl(const std::string& path);
void write_indices_csv(const IndexSeries& indices, const std::string& path);
void write_shares_csv(const IndexSeries& indices, const std::string& path);
void write_networks_csv(const EstimateSeries& series, double threshold,
                        const std::string& path);
void write_entropy_json(const EntropyReport& report, int undefined_share_rows,
                        const std::string& path);

struct EmitSet {
  bool estimates = false;
  bool indices = false;
  bool entropy = false;
  bool networks = false;

  bool any() const { return estimates || indices || entropy || networks; }
};

/// Parses a comma-separated subset of estimates,indices,entropy,networks.
EmitSet parse_emit(const std::string& csv);

struct RunConfig {
  std::string input;  // trajectory csv path, or "simulate:<scenario>"
  EstimatorConfig estimator;
  StimulusField stimulus;  // applied to csv inputs; simulated scenarios keep
                           // their own field
  std::string output_dir;
  EmitSet emit;
  bool flip_y = false;
  std::optional<std::uint64_t> seed;  // overrides a scenario's builtin seed
  double net_threshold = 0.0;
  int max_gap = 5;
  double fps = 60.0;
  std::string length_unit = "cm";
  std::optional<int> frames;         // simulated inputs: override length
  std::optional<double> noise_sigma; // simulated inputs: override noise
};

/// Loads the JSON config schema; unknown keys are a ConfigError. A "lambda"
/// key switches the estimator to an absolute penalty unless "lambda_mode"
/// says otherwise.
RunConfig load_run_config(const std::string& path);

void validate_run_config(const RunConfig& config);

/// Ingest-or-simulate, estimate, derive indices, and emit the selected
/// outputs. Returns a process exit code (0 success; 2 config, 3 ingest,
/// 4 io, 1 other) and prints diagnostics to stderr on failure. Identical
/// config and seed produce byte-identical output files.
int run(const RunConfig& config);

/// "%.9g" float formatting used for every serialized number.
inline std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace swarmnet
