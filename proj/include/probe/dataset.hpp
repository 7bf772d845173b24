#pragma once

#include "probe/geometry.hpp"
#include "probe/image.hpp"
#include "probe/predictors.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace probe {

struct TrackedFeature {
  int track_id = 0;
  ImagePoint y;
};

struct Frame {
  int index = 0;
  double t = 0.0;
  std::vector<TrackedFeature> features;
  std::string image_path; // empty when no image was recorded
};

struct TimedImu {
  double t = 0.0;
  ImuSample sample;
};

struct GroundTruthPoint {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
};

enum class FeatureLabel { static_point, moving, outlier };

/// Ingestion layout: calib.json, imu.csv, tracks.csv, optional images/,
/// optional predictors.csv, optional groundtruth.csv, optional labels.csv.
struct Dataset {
  StereoCamera cam;
  RigCalibration rig;
  double frame_rate = 10.0;
  std::string camera_id;

  std::vector<Frame> frames;
  std::vector<TimedImu> imu;
  std::vector<GroundTruthPoint> ground_truth; // may be empty or sparse
  // (frame_idx, track_id) -> precomputed predictor vector
  std::map<std::pair<int, int>, PredictorVector> predictors;
  // (frame_idx, track_id) -> label (simulator datasets only)
  std::map<std::pair<int, int>, FeatureLabel> labels;

  bool has_ground_truth() const { return !ground_truth.empty(); }
  bool has_images() const;

  /// IMU samples with t_a <= t < t_b.
  std::vector<ImuSample> imu_window(double t_a, double t_b) const;

  /// Nearest ground-truth position to time t, within half a frame period.
  std::optional<Vec3> ground_truth_at(double t) const;
};

Dataset load_dataset(const std::string& dir);
void save_dataset(const Dataset& ds, const std::string& dir);

/// Split one row of a CSV file; no quoting support.
std::vector<std::string> split_csv_row(const std::string& line);

} // namespace probe
