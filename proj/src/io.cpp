#include "swarmnet/io.hpp"

#include "swarmnet/estimator.hpp"
#include "swarmnet/simulator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace swarmnet {

namespace {

// Writes to "<path>.tmp" and renames on commit, so a failed run never leaves
// a half-written output behind.
class AtomicFile {
 public:
  explicit AtomicFile(std::string path)
      : final_(std::move(path)), tmp_(final_ + ".tmp") {
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("io: cannot open for writing: " + tmp_);
  }

  ~AtomicFile() {
    if (!committed_) discard();
  }

  std::ostream& stream() { return out_; }

  void commit() {
    out_.flush();
    if (!out_) {
      discard();
      throw IoError("io: write failed: " + tmp_);
    }
    out_.close();
    std::error_code ec;
    fs::rename(tmp_, final_, ec);
    if (ec) {
      discard();
      throw IoError("io: rename failed for " + final_ + ": " + ec.message());
    }
    committed_ = true;
  }

 private:
  void discard() {
    out_.close();
    std::error_code ec;
    fs::remove(tmp_, ec);
  }

  std::string final_;
  std::string tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

TrajectoryDataset ingest_csv(const std::string& path,
                             const IngestOptions& opt) {
  std::ifstream in(path);
  if (!in) throw IoError("io: cannot open input file: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw IngestError(IngestCode::bad_header, "ingest: empty file: " + path);
  {
    const auto head = split_csv(lower(line));
    const std::vector<std::string> want{"frame", "id", "x", "y"};
    if (head.size() != want.size() ||
        !std::equal(head.begin(), head.end(), want.begin()))
      throw IngestError(IngestCode::bad_header,
                        "ingest: header must be \"frame,id,x,y\", got \"" +
                            trim(line) + "\"");
  }

  struct Row {
    long frame;
    int id;
    double x, y;
  };
  std::vector<Row> rows;
  long fmin = std::numeric_limits<long>::max();
  long fmax = std::numeric_limits<long>::min();
  std::set<int> ids;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (f.size() != 4)
      throw IngestError(IngestCode::bad_row,
                        "ingest: expected 4 fields at " + where);
    Row r{};
    try {
      size_t used = 0;
      r.frame = std::stol(f[0], &used);
      if (used != f[0].size()) throw std::invalid_argument("frame");
      r.id = std::stoi(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument("id");
      r.x = std::stod(f[2]);
      r.y = std::stod(f[3]);
    } catch (const std::exception&) {
      throw IngestError(IngestCode::bad_row,
                        "ingest: unparsable row at " + where);
    }
    if (r.frame < 0 || r.id < 1 || !std::isfinite(r.x) || !std::isfinite(r.y))
      throw IngestError(IngestCode::bad_row,
                        "ingest: out-of-domain values at " + where);
    fmin = std::min(fmin, r.frame);
    fmax = std::max(fmax, r.frame);
    ids.insert(r.id);
    rows.push_back(r);
  }
  if (rows.empty())
    throw IngestError(IngestCode::too_small, "ingest: no data rows in " + path);

  const int n = static_cast<int>(ids.size());
  if (*ids.begin() != 1 || *ids.rbegin() != n)
    throw IngestError(
        IngestCode::non_contiguous_ids,
        "ingest: ids must form 1..N, got " + std::to_string(*ids.begin()) +
            ".." + std::to_string(*ids.rbegin()) + " with " +
            std::to_string(n) + " distinct ids");
  const long frames_long = fmax - fmin + 1;
  if (n < 2 || frames_long < 2)
    throw IngestError(IngestCode::too_small,
                      "ingest: need >= 2 individuals and >= 2 frames, got " +
                          std::to_string(n) + " ids over " +
                          std::to_string(frames_long) + " frames");
  const int frames = static_cast<int>(frames_long);

  TrajectoryDataset ds = make_dataset(n, frames, 1.0 / opt.fps,
                                      opt.length_unit);
  std::vector<std::vector<char>> present(
      n, std::vector<char>(static_cast<size_t>(frames), 0));
  for (const auto& r : rows) {
    const int t = static_cast<int>(r.frame - fmin);
    const int i = r.id - 1;
    if (present[i][t])
      throw IngestError(IngestCode::duplicate_sample,
                        "ingest: duplicate sample for id " +
                            std::to_string(r.id) + " at frame " +
                            std::to_string(r.frame));
    present[i][t] = 1;
    ds.set_position(t, i, Vec2(r.x, r.y));
  }

  for (int i = 0; i < n; ++i) {
    int first = -1, last = -1;
    for (int t = 0; t < frames; ++t)
      if (present[i][t]) {
        if (first < 0) first = t;
        last = t;
      }
    if (first != 0 || last != frames - 1)
      throw IngestError(
          IngestCode::incomplete_coverage,
          "ingest: id " + std::to_string(i + 1) + " covers frames " +
              std::to_string(fmin + first) + ".." + std::to_string(fmin + last) +
              " but the file spans " + std::to_string(fmin) + ".." +
              std::to_string(fmax));
    int t = first + 1;
    while (t <= last) {
      if (present[i][t]) {
        ++t;
        continue;
      }
      int gap_end = t;
      while (!present[i][gap_end]) ++gap_end;  // bounded by `last`
      const int gap_len = gap_end - t;
      if (gap_len > opt.max_gap)
        throw IngestError(
            IngestCode::oversized_gap,
            "ingest: id " + std::to_string(i + 1) + " missing frames " +
                std::to_string(fmin + t) + ".." +
                std::to_string(fmin + gap_end - 1) + " (" +
                std::to_string(gap_len) + " > max_gap " +
                std::to_string(opt.max_gap) + ")");
      const Vec2 a = ds.position(t - 1, i);
      const Vec2 b = ds.position(gap_end, i);
      for (int u = t; u < gap_end; ++u) {
        const double f = static_cast<double>(u - (t - 1)) /
                         static_cast<double>(gap_end - (t - 1));
        ds.set_position(u, i, Vec2(a + f * (b - a)));
      }
      t = gap_end + 1;
    }
  }

  if (opt.flip_y) {
    // Reflect y within the data's own bounding box: equivalent to negating
    // image-space y and shifting back into the observed range.
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -ymin;
    for (int i = 0; i < n; ++i) {
      ymin = std::min(ymin, ds.positions.col(2 * i + 1).minCoeff());
      ymax = std::max(ymax, ds.positions.col(2 * i + 1).maxCoeff());
    }
    for (int i = 0; i < n; ++i)
      ds.positions.col(2 * i + 1) =
          (ymin + ymax) - ds.positions.col(2 * i + 1).array();
  }

  validate_dataset(ds);
  return ds;
}

void write_trajectories_csv(const TrajectoryDataset& ds,
                            const std::string& path) {
  AtomicFile file(path);
  auto& out = file.stream();
  out << "frame,id,x,y\n";
  for (int t = 0; t < ds.num_frames; ++t)
    for (int i = 0; i < ds.num_individuals; ++i) {
      const Vec2 p = ds.position(t, i);
      out << t << ',' << (i + 1) << ',' << fmt9(p.x()) << ',' << fmt9(p.y())
          << '\n';
    }
  file.commit();
}

void write_estimates_jsonl(const EstimateSeries& series,
                           const std::string& path) {
  AtomicFile file(path);
  auto& out = file.stream();
  for (const auto& est : series.windows) {
    const int n = est.n();
    out << "{\"window\":" << est.window_index << ",\"weights\":[";
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i + j) out << ',';
        out << fmt9(est.weights(i, j));
      }
    out << "],\"stim\":[";
    for (int i = 0; i < n; ++i) {
      if (i) out << ',';
      out << fmt9(est.stim_weights(i));
    }
    out << "],\"dirs\":[";
    for (int i = 0; i < n; ++i) {
      if (i) out << ',';
      out << '[' << fmt9(est.preferred_dirs(0, i)) << ','
          << fmt9(est.preferred_dirs(1, i)) << ']';
    }
    out << "]}\n";
  }
  file.commit();
}

EstimateSeries read_estimates_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("io: cannot open estimates file: " + path);
  EstimateSeries series;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError("io: bad estimates line " + std::to_string(line_no) +
                       " in " + path + ": " + e.what());
    }
    if (!j.contains("window") || !j.contains("weights") ||
        !j.contains("stim") || !j.contains("dirs"))
      throw InputError("io: estimates line " + std::to_string(line_no) +
                       " missing fields in " + path);
    const auto& stim = j["stim"];
    const int n = static_cast<int>(stim.size());
    const auto& w = j["weights"];
    const auto& dirs = j["dirs"];
    if (static_cast<int>(w.size()) != n * n ||
        static_cast<int>(dirs.size()) != n)
      throw InputError("io: inconsistent estimate shapes at line " +
                       std::to_string(line_no) + " in " + path);
    WindowEstimate est = make_window_estimate(std::max(n, 2),
                                              j["window"].get<int>());
    est.weights.resize(n, n);
    est.stim_weights.resize(n);
    est.preferred_dirs.resize(2, n);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < n; ++c)
        est.weights(i, c) = w[i * n + c].get<double>();
    for (int i = 0; i < n; ++i) {
      est.stim_weights(i) = stim[i].get<double>();
      est.preferred_dirs(0, i) = dirs[i][0].get<double>();
      est.preferred_dirs(1, i) = dirs[i][1].get<double>();
    }
    series.windows.push_back(std::move(est));
  }
  if (series.windows.empty())
    throw InputError("io: no estimates found in " + path);
  series.num_individuals = series.windows.front().n();
  return series;
}

void write_indices_csv(const IndexSeries& indices, const std::string& path) {
  AtomicFile file(path);
  auto& out = file.stream();
  out << "window,s_att,s_stim,s_auto";
  for (int i = 0; i < indices.num_individuals; ++i) out << ",I_" << (i + 1);
  out << '\n';
  for (const auto& w : indices.windows) {
    out << w.window_index << ',' << fmt9(w.s_att) << ',' << fmt9(w.s_stim)
        << ',' << fmt9(w.s_auto);
    for (int i = 0; i < indices.num_individuals; ++i)
      out << ',' << fmt9(w.influence(i));
    out << '\n';
  }
  file.commit();
}

void write_shares_csv(const IndexSeries& indices, const std::string& path) {
  AtomicFile file(path);
  auto& out = file.stream();
  out << "window,id,defined,c_att,c_stim,c_auto\n";
  for (const auto& w : indices.windows)
    for (int i = 0; i < indices.num_individuals; ++i) {
      const auto& s = w.shares[i];
      out << w.window_index << ',' << (i + 1) << ',' << (s.defined ? 1 : 0)
          << ',' << fmt9(s.attraction) << ',' << fmt9(s.stimulus) << ','
          << fmt9(s.autonomous) << '\n';
    }
  file.commit();
}

void write_networks_csv(const EstimateSeries& series, double threshold,
                        const std::string& path) {
  AtomicFile file(path);
  auto& out = file.stream();
  out << "window,i,j,w_ij\n";
  for (const auto& est : series.windows) {
    const int n = est.n();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double w = est.weights(i, j);
        if (w >= threshold)
          out << est.window_index << ',' << (i + 1) << ',' << (j + 1) << ','
              << fmt9(w) << '\n';
      }
  }
  file.commit();
}

namespace {

void json_number_or_null(std::ostream& out, const std::optional<double>& v) {
  if (v)
    out << fmt9(*v);
  else
    out << "null";
}

void json_vector(std::ostream& out, const Eigen::VectorXd& v) {
  out << '[';
  for (int i = 0; i < v.size(); ++i) {
    if (i) out << ',';
    out << fmt9(v(i));
  }
  out << ']';
}

}  // namespace

void write_entropy_json(const EntropyReport& rep, int undefined_share_rows,
                        const std::string& path) {
  AtomicFile file(path);
  auto& out = file.stream();
  out << "{\n  \"h_influ\": ";
  json_number_or_null(out, rep.h_influ);
  out << ",\n  \"h_stim\": ";
  json_number_or_null(out, rep.h_stim);
  out << ",\n  \"r_bar\": ";
  json_vector(out, rep.r_bar);
  out << ",\n  \"r_bar_stim\": ";
  json_vector(out, rep.r_bar_stim);
  out << ",\n  \"skipped_windows_influence\": " << rep.skipped_windows_influence
      << ",\n  \"skipped_windows_stim\": " << rep.skipped_windows_stim
      << ",\n  \"total_windows\": " << rep.total_windows
      << ",\n  \"undefined_share_rows\": " << undefined_share_rows << "\n}\n";
  file.commit();
}

EmitSet parse_emit(const std::string& csv) {
  EmitSet set;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string v = lower(trim(item));
    if (v.empty()) continue;
    if (v == "estimates")
      set.estimates = true;
    else if (v == "indices")
      set.indices = true;
    else if (v == "entropy")
      set.entropy = true;
    else if (v == "networks")
      set.networks = true;
    else
      throw ConfigError("config: unknown emit target '" + v + "'");
  }
  return set;
}

namespace {

void expect_keys(const json& j, const std::set<std::string>& allowed,
                 const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + key + "' in " + where);
}

StimulusField parse_stimulus(const json& j) {
  expect_keys(j, {"variant", "center", "angular_speed_deg_per_frame", "sense"},
              "stimulus");
  const std::string variant = lower(j.value("variant", "none"));
  if (variant == "none") return StimulusField::none_field();
  if (variant != "rotating")
    throw ConfigError("config: unknown stimulus variant '" + variant + "'");
  Vec2 center(20.0, 20.0);
  if (j.contains("center")) {
    const auto& c = j["center"];
    if (!c.is_array() || c.size() != 2)
      throw ConfigError("config: stimulus center must be [x, y]");
    center = Vec2(c[0].get<double>(), c[1].get<double>());
  }
  const double speed = j.value("angular_speed_deg_per_frame", 0.0);
  if (!(speed > 0.0))
    throw ConfigError(
        "config: rotating stimulus needs angular_speed_deg_per_frame > 0");
  const std::string sense = lower(j.value("sense", "clockwise"));
  if (sense != "clockwise" && sense != "counterclockwise")
    throw ConfigError("config: stimulus sense must be clockwise or "
                      "counterclockwise");
  return StimulusField::rotating(center, speed,
                                 sense == "clockwise"
                                     ? RotationSense::clockwise
                                     : RotationSense::counterclockwise);
}

EstimatorConfig parse_estimator(const json& j) {
  expect_keys(j,
              {"lag_frames", "window_len", "lambda", "lambda_mode",
               "solver_tol", "max_iters", "velocity_scheme"},
              "estimator");
  EstimatorConfig c;
  c.lag_frames = j.value("lag_frames", c.lag_frames);
  c.window_len = j.value("window_len", c.window_len);
  if (j.contains("lambda")) {
    c.lambda = j["lambda"].get<double>();
    c.lambda_rule = LambdaRule::absolute;  // explicit value means literal
  }
  if (j.contains("lambda_mode")) {
    const std::string mode = lower(j["lambda_mode"].get<std::string>());
    if (mode == "absolute")
      c.lambda_rule = LambdaRule::absolute;
    else if (mode == "fraction_of_max")
      c.lambda_rule = LambdaRule::fraction_of_max;
    else
      throw ConfigError("config: lambda_mode must be absolute or "
                        "fraction_of_max");
  }
  c.solver_tol = j.value("solver_tol", c.solver_tol);
  c.max_iters = j.value("max_iters", c.max_iters);
  if (j.contains("velocity_scheme")) {
    const std::string s = lower(j["velocity_scheme"].get<std::string>());
    if (s == "forward")
      c.velocity_scheme = VelocityScheme::forward;
    else if (s == "central")
      c.velocity_scheme = VelocityScheme::central;
    else
      throw ConfigError("config: velocity_scheme must be forward or central");
  }
  validate_estimator_config(c);
  return c;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("io: cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: cannot parse " + path + ": " + e.what());
  }
  expect_keys(j,
              {"input", "estimator", "stimulus", "output_dir", "emit",
               "flip_y", "seed", "threshold", "max_gap", "fps", "length_unit",
               "frames", "noise_sigma"},
              "config");
  RunConfig cfg;
  cfg.input = j.value("input", "");
  if (j.contains("estimator")) cfg.estimator = parse_estimator(j["estimator"]);
  if (j.contains("stimulus")) cfg.stimulus = parse_stimulus(j["stimulus"]);
  cfg.output_dir = j.value("output_dir", "");
  if (j.contains("emit")) {
    const auto& e = j["emit"];
    if (e.is_string()) {
      cfg.emit = parse_emit(e.get<std::string>());
    } else if (e.is_array()) {
      std::string joined;
      for (const auto& item : e)
        joined += (joined.empty() ? "" : ",") + item.get<std::string>();
      cfg.emit = parse_emit(joined);
    } else {
      throw ConfigError("config: emit must be an array or comma string");
    }
  }
  cfg.flip_y = j.value("flip_y", false);
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.net_threshold = j.value("threshold", 0.0);
  cfg.max_gap = j.value("max_gap", 5);
  cfg.fps = j.value("fps", 60.0);
  cfg.length_unit = j.value("length_unit", std::string("cm"));
  if (j.contains("frames")) cfg.frames = j["frames"].get<int>();
  if (j.contains("noise_sigma")) cfg.noise_sigma = j["noise_sigma"].get<double>();
  return cfg;
}

void validate_run_config(const RunConfig& cfg) {
  if (cfg.input.empty()) throw ConfigError("config: input is required");
  if (cfg.output_dir.empty())
    throw ConfigError("config: output_dir is required");
  if (!cfg.emit.any())
    throw ConfigError("config: emit set must name at least one output");
  if (!(cfg.fps > 0.0)) throw ConfigError("config: fps must be > 0");
  if (cfg.max_gap < 0) throw ConfigError("config: max_gap must be >= 0");
  validate_estimator_config(cfg.estimator);
}

int run(const RunConfig& cfg) {
  try {
    validate_run_config(cfg);

    TrajectoryDataset dataset;
    StimulusField field = cfg.stimulus;
    bool simulated = false;
    if (cfg.input.rfind("simulate:", 0) == 0) {
      simulated = true;
      ScenarioSpec spec = find_scenario(cfg.input.substr(9));
      spec.lag_frames = cfg.estimator.lag_frames;
      if (cfg.seed) spec.seed = *cfg.seed;
      if (cfg.frames) resize_scenario(spec, *cfg.frames);
      if (cfg.noise_sigma) spec.noise_sigma = *cfg.noise_sigma;
      dataset = simulate(spec, cfg.estimator.window_len).dataset;
      field = spec.stimulus;  // scenario owns its field
    } else {
      if (!fs::exists(cfg.input))
        throw InputError("io: input file does not exist: " + cfg.input);
      dataset = ingest_csv(
          cfg.input,
          IngestOptions{cfg.flip_y, cfg.max_gap, cfg.fps, cfg.length_unit});
    }

    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);

    const EstimateSeries series = estimate_series(dataset, field,
                                                  cfg.estimator);
    const IndexSeries indices = compute_indices(series);
    const EntropyReport entropy = influence_entropy(series);

    if (simulated)
      write_trajectories_csv(dataset, (dir / "trajectories.csv").string());
    if (cfg.emit.estimates)
      write_estimates_jsonl(series, (dir / "estimates.jsonl").string());
    if (cfg.emit.indices) {
      write_indices_csv(indices, (dir / "indices.csv").string());
      write_shares_csv(indices, (dir / "shares.csv").string());
    }
    if (cfg.emit.entropy)
      write_entropy_json(entropy, indices.undefined_share_rows(),
                         (dir / "entropy.json").string());
    if (cfg.emit.networks)
      write_networks_csv(series, cfg.net_threshold,
                         (dir / "networks.csv").string());
    return 0;
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
}

}  // namespace swarmnet
