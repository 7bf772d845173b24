// probe: stereo visual-inertial odometry with learned per-feature weights.
// Commands: simulate, train, run, compare, inspect.

#include "probe/dataset.hpp"
#include "probe/frontend.hpp"
#include "probe/probe_model.hpp"
#include "probe/random.hpp"
#include "probe/simulator.hpp"
#include "probe/training.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace probe;

namespace {

// ---------------------------------------------------------------- logging

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

LogLevel g_log_level = LogLevel::warn;

void init_log_level() {
  const char* env = std::getenv("PROBE_LOG");
  if (!env) return;
  const std::string v(env);
  if (v == "debug") g_log_level = LogLevel::debug;
  else if (v == "info") g_log_level = LogLevel::info;
  else if (v == "warn") g_log_level = LogLevel::warn;
  else if (v == "error") g_log_level = LogLevel::error;
}

void log(LogLevel level, const std::string& msg) {
  static const char* names[] = {"debug", "info", "warn", "error"};
  if (level < g_log_level) return;
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

// ------------------------------------------------------------- exit codes

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// ------------------------------------------------------------ json utils

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open JSON file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

Vec3 vec3_of(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 3) {
    throw UsageError("field '" + key + "' must be a 3-element array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

template <typename T>
void maybe(const json& j, const std::string& key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string trial_name(const std::string& dataset_dir) {
  fs::path p(dataset_dir);
  if (p.filename().empty()) p = p.parent_path();
  return p.filename().string();
}

// ------------------------------------------------------- config overrides

void apply_frontend_overrides(const json& j, FrontendConfig& cfg) {
  maybe(j, "sigma_px", cfg.sigma_px);
  maybe(j, "prefilter_deg", cfg.prefilter_deg);
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    maybe(s, "max_iterations", cfg.solver.max_iterations);
    maybe(s, "convergence_tol", cfg.solver.convergence_tol);
    maybe(s, "lambda_init", cfg.solver.lambda_init);
    maybe(s, "lambda_up", cfg.solver.lambda_up);
    maybe(s, "lambda_down", cfg.solver.lambda_down);
    maybe(s, "max_inner_retries", cfg.solver.max_inner_retries);
  }
  if (j.contains("ransac")) {
    const json& r = j.at("ransac");
    maybe(r, "outlier_fraction", cfg.ransac.outlier_fraction);
    maybe(r, "inlier_threshold", cfg.ransac.inlier_threshold);
    maybe(r, "min_set", cfg.ransac.min_set);
  }
  if (j.contains("predictors")) {
    const json& p = j.at("predictors");
    maybe(p, "patch_size", cfg.predictors.patch_size);
    maybe(p, "entropy_bins", cfg.predictors.entropy_bins);
    maybe(p, "blur_kernel_size", cfg.predictors.blur_kernel_size);
    maybe(p, "flow_radius_small", cfg.predictors.flow_radius_small);
    maybe(p, "flow_radius_large", cfg.predictors.flow_radius_large);
    maybe(p, "flow_variance_floor", cfg.predictors.flow_variance_floor);
    maybe(p, "fft_cutoff", cfg.predictors.fft_cutoff);
  }
}

// --------------------------------------------------------- sim spec file

PathKind path_kind_of(const std::string& name) {
  if (name == "line") return PathKind::line;
  if (name == "arc") return PathKind::arc;
  if (name == "loop") return PathKind::loop;
  throw UsageError("trajectory.kind must be line, arc, or loop (got '" + name +
                   "')");
}

GroundTruthDensity gt_density_of(const std::string& name) {
  if (name == "every_frame") return GroundTruthDensity::every_frame;
  if (name == "every_nth") return GroundTruthDensity::every_nth;
  if (name == "endpoints_only") return GroundTruthDensity::endpoints_only;
  if (name == "none") return GroundTruthDensity::none;
  throw UsageError("ground_truth.density must be every_frame, every_nth, "
                   "endpoints_only, or none (got '" + name + "')");
}

SimSpec parse_sim_spec(const json& j) {
  SimSpec spec;
  if (!j.contains("world")) throw UsageError("sim spec: missing field 'world'");
  if (!j.contains("trajectory")) {
    throw UsageError("sim spec: missing field 'trajectory'");
  }
  const json& w = j.at("world");
  if (!w.contains("static_count")) {
    throw UsageError("sim spec: missing field 'world.static_count'");
  }
  spec.world.static_count = w.at("static_count").get<int>();
  if (w.contains("bounds_min")) {
    spec.world.bounds_min = vec3_of(w.at("bounds_min"), "world.bounds_min");
  }
  if (w.contains("bounds_max")) {
    spec.world.bounds_max = vec3_of(w.at("bounds_max"), "world.bounds_max");
  }
  maybe(w, "seed", spec.world.seed);
  if (w.contains("clusters")) {
    for (const json& c : w.at("clusters")) {
      MovingClusterSpec cluster;
      maybe(c, "count", cluster.count);
      maybe(c, "radius", cluster.radius);
      if (c.contains("center")) {
        cluster.center = vec3_of(c.at("center"), "cluster.center");
      }
      if (c.contains("velocity")) {
        cluster.velocity = vec3_of(c.at("velocity"), "cluster.velocity");
      }
      spec.world.clusters.push_back(cluster);
    }
  }

  const json& t = j.at("trajectory");
  if (!t.contains("kind")) {
    throw UsageError("sim spec: missing field 'trajectory.kind'");
  }
  if (!t.contains("duration")) {
    throw UsageError("sim spec: missing field 'trajectory.duration'");
  }
  spec.traj.kind = path_kind_of(t.at("kind").get<std::string>());
  spec.traj.duration = t.at("duration").get<double>();
  maybe(t, "frame_rate", spec.traj.frame_rate);
  maybe(t, "imu_rate", spec.traj.imu_rate);
  maybe(t, "speed", spec.traj.speed);
  maybe(t, "arc_radius", spec.traj.arc_radius);

  if (j.contains("noise")) {
    const json& n = j.at("noise");
    maybe(n, "sigma_px", spec.noise.sigma_px);
    maybe(n, "sigma_gyro", spec.noise.sigma_gyro);
    if (n.contains("gyro_bias")) {
      spec.noise.gyro_bias = vec3_of(n.at("gyro_bias"), "noise.gyro_bias");
    }
    maybe(n, "outlier_prob", spec.noise.outlier_prob);
    maybe(n, "outlier_px", spec.noise.outlier_px);
    maybe(n, "blur_noise_gain", spec.noise.blur_noise_gain);
    if (n.contains("blur_schedule")) {
      spec.noise.blur_schedule =
          n.at("blur_schedule").get<std::vector<double>>();
    }
  }

  if (j.contains("camera")) {
    const json& c = j.at("camera");
    maybe(c, "f", spec.cam.f);
    maybe(c, "b", spec.cam.b);
    maybe(c, "c_u", spec.cam.c_u);
    maybe(c, "c_v", spec.cam.c_v);
    maybe(c, "image_width", spec.cam.image_width);
    maybe(c, "image_height", spec.cam.image_height);
  }
  if (j.contains("rig") && j.at("rig").contains("C_cv")) {
    const json& m = j.at("rig").at("C_cv");
    if (!m.is_array() || m.size() != 9) {
      throw UsageError("field 'rig.C_cv' must be a 9-element row-major array");
    }
    Mat3 C;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) C(r, c) = m[3 * r + c].get<double>();
    }
    spec.rig.C_cv = C;
  }
  if (j.contains("ground_truth")) {
    const json& g = j.at("ground_truth");
    if (g.contains("density")) {
      spec.gt_density = gt_density_of(g.at("density").get<std::string>());
    }
    maybe(g, "stride", spec.gt_stride);
  }
  maybe(j, "render_images", spec.render_images);
  maybe(j, "camera_id", spec.camera_id);
  return spec;
}

// ------------------------------------------------------------ run output

json beta_stats(const std::vector<double>& betas) {
  json j;
  j["count"] = betas.size();
  if (betas.empty()) return j;
  std::vector<double> sorted(betas);
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (double b : sorted) mean += b;
  j["min"] = sorted.front();
  j["max"] = sorted.back();
  j["median"] = sorted[sorted.size() / 2];
  j["mean"] = mean / static_cast<double>(sorted.size());
  return j;
}

json beta_histogram(const std::vector<double>& betas) {
  // log10-spaced bins spanning the clamp range [1e-3, 1e6]
  constexpr int kBins = 18;
  std::vector<double> edges;
  for (int i = 0; i <= kBins; ++i) {
    edges.push_back(std::pow(10.0, -3.0 + 0.5 * i));
  }
  std::vector<int> counts(kBins, 0);
  for (double b : betas) {
    int bin = static_cast<int>(std::floor((std::log10(b) + 3.0) / 0.5));
    bin = std::clamp(bin, 0, kBins - 1);
    ++counts[bin];
  }
  json j;
  j["edges"] = edges;
  j["counts"] = counts;
  return j;
}

json metrics_json(const std::string& trial, const std::string& mode,
                  const SequenceResult& res, uint64_t seed) {
  json j;
  j["trial"] = trial;
  j["mode"] = mode;
  j["seed"] = seed;
  j["frames"] = res.positions.size();
  j["path_length_m"] = res.path_length;
  j["has_ground_truth_metrics"] = res.has_gt_metrics;
  j["armse_m"] = res.armse;
  j["final_error_m"] = res.final_error;
  j["loop_closure_error_m"] = res.loop_closure_error;
  j["per_frame_error_m"] = res.per_frame_error;
  j["dropped_weights"] = res.dropped_weights;
  j["partial"] = res.partial;
  j["failure"] = res.failure;
  j["beta"] = beta_stats(res.all_betas);
  return j;
}

void write_trajectory_csv(const SequenceResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << std::setprecision(17);
  out << "t,x,y,z\n";
  for (size_t i = 0; i < res.positions.size(); ++i) {
    out << res.times[i] << "," << res.positions[i].x() << ","
        << res.positions[i].y() << "," << res.positions[i].z() << "\n";
  }
}

void write_errors_csv(const SequenceResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << std::setprecision(17);
  out << "t,error_m\n";
  for (size_t i = 0; i < res.per_frame_error.size(); ++i) {
    out << res.times[i] << "," << res.per_frame_error[i] << "\n";
  }
}

SequenceResult run_one_mode(const Dataset& ds, EstimatorMode mode,
                            const ProbeModel* model,
                            const FrontendConfig& cfg) {
  log(LogLevel::info, std::string("running mode ") + mode_name(mode));
  return run_sequence(ds, mode, model, cfg);
}

// --------------------------------------------------------------- commands

struct CommonArgs {
  std::string dataset;
  std::string mode = "nominal";
  std::string model;
  std::string out;
  std::string config;
  uint64_t seed = 0;
  double prefilter_deg = 5.0;
};

FrontendConfig make_frontend_config(const CommonArgs& args) {
  FrontendConfig cfg;
  cfg.seed = args.seed;
  cfg.prefilter_deg = args.prefilter_deg;
  if (!args.config.empty()) {
    apply_frontend_overrides(load_json_file(args.config), cfg);
  }
  return cfg;
}

int cmd_simulate(const std::string& spec_path, const std::string& out,
                 bool seed_set, uint64_t seed) {
  SimSpec spec = parse_sim_spec(load_json_file(spec_path));
  if (seed_set) spec.world.seed = seed;
  log(LogLevel::info, "generating dataset into " + out);
  const SimResult sim = generate(spec);
  write_sim(sim, out);
  std::cout << "wrote " << sim.dataset.frames.size() << " frames, "
            << sim.dataset.imu.size() << " IMU samples to " << out << "\n";
  return kExitOk;
}

int cmd_train(const CommonArgs& args, int iterations,
              const std::vector<int>& k_cands,
              const std::vector<double>& gamma_cands) {
  if (args.dataset.empty()) throw UsageError("train requires --dataset");
  if (args.out.empty()) throw UsageError("train requires --out (model file)");
  const Dataset ds = load_dataset(args.dataset);

  TrainConfig cfg;
  cfg.frontend = make_frontend_config(args);
  cfg.iterations = iterations;
  if (!k_cands.empty()) cfg.k_candidates = k_cands;
  if (!gamma_cands.empty()) cfg.gamma_candidates = gamma_cands;
  if (!args.config.empty()) {
    const json j = load_json_file(args.config);
    if (j.contains("train")) {
      const json& t = j.at("train");
      maybe(t, "subset_fraction", cfg.subset_fraction);
      maybe(t, "select_hyperparams", cfg.select_hyperparams);
      maybe(t, "fixed_k", cfg.fixed_k);
      maybe(t, "fixed_gamma", cfg.fixed_gamma);
      if (t.contains("mode")) {
        const std::string m = t.at("mode").get<std::string>();
        if (m == "per_step") cfg.mode = RmseMode::per_step;
        else if (m == "windowed") cfg.mode = RmseMode::windowed;
        else if (m == "full_path") cfg.mode = RmseMode::full_path;
        else if (m == "loop_closure") cfg.mode = RmseMode::loop_closure;
        else throw UsageError("train.mode: unknown RMSE mode '" + m + "'");
      }
    }
  }

  TrainReport report;
  const ProbeModel model = train_probe_model(ds, cfg, &report);
  save_model(model, args.out);

  json j;
  j["dataset"] = trial_name(args.dataset);
  j["seed"] = args.seed;
  switch (report.mode) {
    case RmseMode::per_step: j["rmse_mode"] = "per_step"; break;
    case RmseMode::windowed: j["rmse_mode"] = "windowed"; break;
    case RmseMode::full_path: j["rmse_mode"] = "full_path"; break;
    case RmseMode::loop_closure: j["rmse_mode"] = "loop_closure"; break;
  }
  j["theta_size"] = report.theta_size;
  j["alpha_bar_m"] = report.alpha_bar;
  j["k"] = report.k;
  j["gamma"] = report.gamma;
  j["skipped_steps"] = report.skipped_steps;
  j["per_iteration_rmse_m"] = report.per_iteration_rmse;
  j["training_armse_m"] = report.training_armse;
  write_json_file(j, args.out + ".report.json");

  std::cout << "model: " << args.out << "\n"
            << "  mode      " << j["rmse_mode"].get<std::string>() << "\n"
            << "  |Theta|   " << report.theta_size << "\n"
            << "  alpha_bar " << report.alpha_bar << " m\n"
            << "  K         " << report.k << "\n"
            << "  gamma     " << report.gamma << "\n"
            << "  ARMSE     " << report.training_armse << " m\n";
  return kExitOk;
}

int cmd_run(const CommonArgs& args) {
  if (args.dataset.empty()) throw UsageError("run requires --dataset");
  if (args.out.empty()) throw UsageError("run requires --out (directory)");
  const EstimatorMode mode = [&] {
    try {
      return mode_from_name(args.mode);
    } catch (const FrontendError& e) {
      throw UsageError(e.what());
    }
  }();
  if (mode == EstimatorMode::probe && args.model.empty()) {
    throw UsageError("probe mode requires --model");
  }

  const Dataset ds = load_dataset(args.dataset);
  const FrontendConfig cfg = make_frontend_config(args);

  ProbeModel model;
  const ProbeModel* model_ptr = nullptr;
  if (mode == EstimatorMode::probe) {
    model = load_model(args.model, cfg.predictors.hash());
    if (model.config_hash_mismatch) {
      log(LogLevel::warn,
          "model predictor config differs from the current config; "
          "beta values may be inconsistent");
    }
    model_ptr = &model;
  }

  const SequenceResult res = run_one_mode(ds, mode, model_ptr, cfg);

  fs::create_directories(args.out);
  const fs::path out(args.out);
  write_trajectory_csv(res, (out / "trajectory.csv").string());
  if (!res.per_frame_error.empty()) {
    write_errors_csv(res, (out / "errors.csv").string());
  }
  write_json_file(metrics_json(trial_name(args.dataset), args.mode, res,
                               args.seed),
                  (out / "metrics.json").string());
  json diag;
  diag["beta_histogram"] = beta_histogram(res.all_betas);
  diag["dropped_weights"] = res.dropped_weights;
  diag["partial"] = res.partial;
  diag["failure"] = res.failure;
  write_json_file(diag, (out / "diagnostics.json").string());

  std::cout << "frames " << res.positions.size() << ", path length "
            << res.path_length << " m";
  if (res.has_gt_metrics) {
    std::cout << ", ARMSE " << res.armse << " m, final error "
              << res.final_error << " m";
  }
  std::cout << "\n";
  if (res.partial) {
    log(LogLevel::error, "sequence truncated: " + res.failure);
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_compare(const CommonArgs& args) {
  if (args.dataset.empty()) throw UsageError("compare requires --dataset");
  if (args.model.empty()) throw UsageError("compare requires --model");
  if (args.out.empty()) throw UsageError("compare requires --out (directory)");

  const Dataset ds = load_dataset(args.dataset);
  const FrontendConfig cfg = make_frontend_config(args);
  const ProbeModel model = load_model(args.model, cfg.predictors.hash());
  if (model.config_hash_mismatch) {
    log(LogLevel::warn, "model predictor config differs from current config");
  }

  json table;
  table["trial"] = trial_name(args.dataset);
  table["seed"] = args.seed;
  json modes;
  double path_length = 0.0;
  for (EstimatorMode mode : {EstimatorMode::nominal_ransac,
                             EstimatorMode::aggressive_ransac,
                             EstimatorMode::probe}) {
    const ProbeModel* m = mode == EstimatorMode::probe ? &model : nullptr;
    const SequenceResult res = run_one_mode(ds, mode, m, cfg);
    json entry;
    entry["armse_m"] = res.armse;
    entry["final_error_m"] = res.final_error;
    entry["loop_closure_error_m"] = res.loop_closure_error;
    entry["partial"] = res.partial;
    modes[mode_name(mode)] = entry;
    path_length = res.path_length;
  }
  table["path_length_m"] = path_length;
  table["modes"] = modes;

  fs::create_directories(args.out);
  write_json_file(table, (fs::path(args.out) / "compare.json").string());

  // text table rendered from the same json values, so the numbers match
  const auto num = [](const json& v) { return v.dump(); };
  std::ostringstream text;
  text << "Trial: " << table["trial"].get<std::string>()
       << "  path length: " << num(table["path_length_m"]) << " m\n";
  text << "mode        ARMSE [m]              final error [m]\n";
  for (const char* name : {"nominal", "aggressive", "probe"}) {
    const json& e = modes[name];
    text << name;
    for (size_t i = std::strlen(name); i < 12; ++i) text << ' ';
    text << num(e["armse_m"]);
    const std::string a = num(e["armse_m"]);
    for (size_t i = a.size(); i < 23; ++i) text << ' ';
    text << num(e["final_error_m"]) << "\n";
  }
  std::ofstream tout((fs::path(args.out) / "compare.txt").string());
  if (!tout) throw IoError("cannot write compare.txt in " + args.out);
  tout << text.str();
  std::cout << text.str();
  return kExitOk;
}

int cmd_inspect(const std::string& model_path) {
  const ProbeModel model = load_model(model_path);
  std::cout << "model:      " << model_path << "\n"
            << "camera_id:  " << model.camera_id << "\n"
            << "|Theta|:    " << model.theta.samples.size() << "\n"
            << "K:          " << model.k << "\n"
            << "gamma:      " << model.gamma << "\n"
            << "alpha_bar:  " << model.theta.alpha_bar << " m\n"
            << "standardization (mean / stddev):\n";
  for (int i = 0; i < kPredictorDim; ++i) {
    std::cout << "  " << kPredictorNames[i] << ": "
              << model.theta.stats.mean[i] << " / "
              << model.theta.stats.stddev[i] << "\n";
  }
  std::cout << "beta response (neighbor-mean multiples of alpha_bar):\n";
  for (double m : {0.5, 1.0, 2.0, 4.0}) {
    const double beta =
        std::clamp(std::pow(m, model.gamma), kBetaMin, kBetaMax);
    std::cout << "  beta(" << m << " alpha_bar) = " << beta << "\n";
  }
  return kExitOk;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

} // namespace

int main(int argc, char** argv) {
  init_log_level();
  CLI::App app{"probe: stereo visual-inertial odometry with learned "
               "per-feature observation weights"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string spec_path;
  std::string k_list, gamma_list;
  int iterations = 10;

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim->add_option("--config", spec_path, "simulation spec JSON")->required();
  sim->add_option("--out", args.out, "output dataset directory")->required();
  CLI::Option* sim_seed = sim->add_option("--seed", args.seed,
                                          "override the spec's world seed");

  CLI::App* train = app.add_subcommand("train", "train a feature quality model");
  train->add_option("--dataset", args.dataset, "dataset directory")->required();
  train->add_option("--out", args.out, "output model file")->required();
  train->add_option("--seed", args.seed, "root random seed");
  train->add_option("--iterations", iterations, "training traversals L");
  train->add_option("--k-candidates", k_list, "comma-separated K candidates");
  train->add_option("--gamma-candidates", gamma_list,
                    "comma-separated gamma candidates");
  train->add_option("--config", args.config, "JSON parameter overrides");
  train->add_option("--prefilter-deg", args.prefilter_deg,
                    "IMU prefilter threshold [deg]");

  CLI::App* run = app.add_subcommand("run", "run odometry over a dataset");
  run->add_option("--dataset", args.dataset, "dataset directory")->required();
  run->add_option("--mode", args.mode, "nominal | aggressive | probe");
  run->add_option("--model", args.model, "model file (probe mode)");
  run->add_option("--out", args.out, "output directory")->required();
  run->add_option("--seed", args.seed, "root random seed");
  run->add_option("--config", args.config, "JSON parameter overrides");
  run->add_option("--prefilter-deg", args.prefilter_deg,
                  "IMU prefilter threshold [deg]");

  CLI::App* cmp = app.add_subcommand("compare", "run all three modes");
  cmp->add_option("--dataset", args.dataset, "dataset directory")->required();
  cmp->add_option("--model", args.model, "model file")->required();
  cmp->add_option("--out", args.out, "output directory")->required();
  cmp->add_option("--seed", args.seed, "root random seed");
  cmp->add_option("--config", args.config, "JSON parameter overrides");
  cmp->add_option("--prefilter-deg", args.prefilter_deg,
                  "IMU prefilter threshold [deg]");

  CLI::App* ins = app.add_subcommand("inspect", "summarize a model file");
  ins->add_option("--model", args.model, "model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(spec_path, args.out, sim_seed->count() > 0,
                          args.seed);
    }
    if (train->parsed()) {
      return cmd_train(args, iterations, parse_int_list(k_list),
                       parse_double_list(gamma_list));
    }
    if (run->parsed()) return cmd_run(args);
    if (cmp->parsed()) return cmd_compare(args);
    if (ins->parsed()) return cmd_inspect(args.model);
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
