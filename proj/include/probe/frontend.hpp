#pragma once

#include "probe/dataset.hpp"
#include "probe/estimator.hpp"
#include "probe/probe_model.hpp"

#include <map>
#include <random>

namespace probe {

struct FrontendError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RansacConfig {
  double confidence = 0.99;      // p
  double outlier_fraction = 0.5; // assumed epsilon
  int min_set = 3;
  double inlier_threshold = 0.1; // 3-D alignment residual [m]
};

enum class EstimatorMode { nominal_ransac, aggressive_ransac, probe };

const char* mode_name(EstimatorMode mode);
EstimatorMode mode_from_name(const std::string& name);

struct FrontendConfig {
  SolverConfig solver;
  PredictorConfig predictors;
  RansacConfig ransac; // confidence comes from the mode
  double sigma_px = 0.5;
  double prefilter_deg = 5.0;
  uint64_t seed = 0;
};

struct MatchedPair {
  int track_id = 0;
  ImagePoint y_a;
  ImagePoint y_b;
};

/// Matched observations between two consecutive frames plus the IMU window.
struct FramePair {
  int frame_idx_a = 0;
  int frame_idx_b = 0;
  double t_a = 0.0;
  double t_b = 0.0;
  std::vector<MatchedPair> matches;
  std::vector<ImuSample> imu_window;
  std::string left_image_path; // frame b, may be empty
};

/// Matches by track id between frames[i] and frames[i+1]; features without
/// valid disparity in either frame are excluded.
FramePair make_frame_pair(const Dataset& ds, size_t i);

/// Removes matches whose rotation-compensated left-camera bearings are
/// separated by more than threshold_deg degrees.
std::vector<MatchedPair> prefilter_cosine(const std::vector<MatchedPair>& matches,
                                          const Mat3& C_ba,
                                          const StereoCamera& cam,
                                          double threshold_deg);

/// ceil(log(1-p) / log(1 - (1-eps)^s)), at least 1.
int ransac_iterations(const RansacConfig& cfg);

struct RansacResult {
  std::vector<size_t> inliers;
  Pose pose;
};

/// Minimal-set hypotheses use the IMU rotation and the closed-form
/// translation; inliers counted by 3-D residual, winner refined with
/// uniform weights.
RansacResult ransac_align(const std::vector<Correspondence>& corrs,
                          const Mat3& C_bar, const RansacConfig& cfg,
                          const SolverConfig& solver, const StereoCamera& cam,
                          std::mt19937_64& rng);

struct MotionDiagnostics {
  int matched = 0;
  int prefiltered_out = 0;
  int used = 0;
  int dropped_weights = 0;
  int solver_iterations = 0;
  std::vector<double> betas; // probe mode only, per used feature
};

/// Predictor vectors for every matched feature of the pair (keyed by
/// track id). Image-derived entries come from the left image when present,
/// otherwise from precomputed predictors.csv rows.
std::map<int, PredictorVector> compute_pair_predictors(
    const Dataset& ds, const FramePair& pair, const PredictorConfig& cfg);

struct MotionEstimate {
  Pose pose;
  MotionDiagnostics diagnostics;
};

MotionEstimate estimate_motion(const Dataset& ds, const FramePair& pair,
                               EstimatorMode mode, const ProbeModel* model,
                               const FrontendConfig& cfg);

struct SequenceResult {
  std::vector<double> times;      // per pose, frame pair count + 1
  std::vector<Vec3> positions;    // world frame, start at origin
  std::vector<Mat3> rotations;    // world -> camera
  double path_length = 0.0;
  bool has_gt_metrics = false;
  double armse = 0.0;       // mean per-frame translational error [m]
  double final_error = 0.0; // norm of final position error [m]
  double loop_closure_error = 0.0; // |end - start| of estimate
  std::vector<double> per_frame_error; // empty without ground truth
  std::vector<double> all_betas;       // probe mode
  int dropped_weights = 0;
  bool partial = false; // a frame failed; trajectory truncated
  std::string failure;
};

SequenceResult run_sequence(const Dataset& ds, EstimatorMode mode,
                            const ProbeModel* model, const FrontendConfig& cfg);

} // namespace probe
