#pragma once

#include "probe/dataset.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace probe {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MovingClusterSpec {
  int count = 20;
  Vec3 center = Vec3::Zero();   // world position at t = 0
  double radius = 1.0;          // spatial extent [m]
  Vec3 velocity = Vec3::Zero(); // constant [m/s]
};

struct WorldSpec {
  int static_count = 300;
  Vec3 bounds_min = Vec3(-15.0, -4.0, 2.0);
  Vec3 bounds_max = Vec3(15.0, 4.0, 40.0);
  std::vector<MovingClusterSpec> clusters;
  uint64_t seed = 0;
};

enum class PathKind { line, arc, loop };

struct TrajectorySpec {
  PathKind kind = PathKind::line;
  double frame_rate = 10.0; // Hz
  double imu_rate = 100.0;  // Hz
  double duration = 6.0;    // s
  double speed = 1.0;       // m/s along the path
  double arc_radius = 25.0; // arc only; loop radius follows from duration
};

struct NoiseSpec {
  double sigma_px = 0.0;
  double sigma_gyro = 0.0;          // rad/s
  Vec3 gyro_bias = Vec3::Zero();    // rad/s
  double outlier_prob = 0.0;
  double outlier_px = 40.0;
  std::vector<double> blur_schedule; // per frame in [0,1]; empty = all 0
  double blur_noise_gain = 3.0;      // kappa
};

enum class GroundTruthDensity { every_frame, every_nth, endpoints_only, none };

struct SimSpec {
  WorldSpec world;
  TrajectorySpec traj;
  NoiseSpec noise;
  StereoCamera cam{400.0, 0.3, 320.0, 240.0, 640, 480};
  RigCalibration rig;
  GroundTruthDensity gt_density = GroundTruthDensity::every_frame;
  int gt_stride = 5; // every_nth
  bool render_images = false;
  std::string camera_id = "sim-stereo";
};

struct SimPose {
  double t = 0.0;
  Vec3 position = Vec3::Zero(); // world frame (= initial camera frame)
  Mat3 C_cw = Mat3::Identity(); // world -> camera
};

struct SimResult {
  Dataset dataset;
  std::vector<SimPose> poses; // one per frame
  // noise-free observations, keyed by (frame_idx, track_id)
  std::map<std::pair<int, int>, ImagePoint> truth_observations;
  std::vector<Image> images; // only when render_images
};

/// Camera pose along the parametric path at time t; the world frame is the
/// camera frame at t = 0.
SimPose trajectory_pose(const TrajectorySpec& traj, double t);

SimResult generate(const SimSpec& spec);

/// Rendered left image for one frame: textured stamps at the true feature
/// locations over a flat background, Gaussian-blurred per the frame's
/// blur level.
Image render_frame(const SimSpec& spec, const SimResult& sim, int frame_idx);

/// Writes the full ingestion layout plus labels.csv and poses_gt.csv
/// (and images/ when rendered).
void write_sim(const SimResult& sim, const std::string& dir);

} // namespace probe
