#include "probe/simulator.hpp"

#include "probe/random.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;

namespace probe {

namespace {

Mat3 yaw_rotation(double theta) {
  // world -> camera for a camera yawed by theta about the world y axis
  Mat3 C;
  C << std::cos(theta), 0.0, -std::sin(theta), 0.0, 1.0, 0.0, std::sin(theta),
      0.0, std::cos(theta);
  return C;
}

double loop_radius(const TrajectorySpec& traj) {
  return traj.speed * traj.duration / (2.0 * M_PI);
}

} // namespace

SimPose trajectory_pose(const TrajectorySpec& traj, double t) {
  SimPose pose;
  pose.t = t;
  switch (traj.kind) {
    case PathKind::line:
      pose.position = Vec3(0.0, 0.0, traj.speed * t);
      pose.C_cw = Mat3::Identity();
      break;
    case PathKind::arc: {
      const double R = traj.arc_radius;
      const double theta = traj.speed * t / R;
      pose.position = Vec3(R * (1.0 - std::cos(theta)), 0.0, R * std::sin(theta));
      pose.C_cw = yaw_rotation(theta);
      break;
    }
    case PathKind::loop: {
      const double R = loop_radius(traj);
      const double theta = 2.0 * M_PI * t / traj.duration;
      pose.position = Vec3(R * (1.0 - std::cos(theta)), 0.0, R * std::sin(theta));
      pose.C_cw = yaw_rotation(theta);
      break;
    }
  }
  return pose;
}

SimResult generate(const SimSpec& spec) {
  if (spec.world.static_count <= 0) {
    throw SimError("world: static landmark count must be positive");
  }
  if ((spec.world.bounds_max - spec.world.bounds_min).minCoeff() <= 0.0) {
    throw SimError("world: degenerate landmark bounds");
  }
  if (spec.traj.imu_rate < spec.traj.frame_rate) {
    throw SimError("trajectory: IMU rate below frame rate");
  }
  if (spec.noise.sigma_px < 0.0 || spec.noise.outlier_prob < 0.0 ||
      spec.noise.outlier_prob > 1.0) {
    throw SimError("noise: invalid parameters");
  }

  SimResult sim;
  Dataset& ds = sim.dataset;
  ds.cam = spec.cam;
  ds.rig = spec.rig;
  ds.frame_rate = spec.traj.frame_rate;
  ds.camera_id = spec.camera_id;

  // Landmarks: static first, then moving clusters; track id = index.
  struct Landmark {
    Vec3 p0;
    Vec3 velocity;
    bool moving;
  };
  std::vector<Landmark> landmarks;
  {
    std::mt19937_64 rng = seed_stream(spec.world.seed, "landmarks");
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < spec.world.static_count; ++i) {
      Vec3 p;
      for (int d = 0; d < 3; ++d) {
        p[d] = spec.world.bounds_min[d] +
               u01(rng) * (spec.world.bounds_max[d] - spec.world.bounds_min[d]);
      }
      landmarks.push_back({p, Vec3::Zero(), false});
    }
    for (const auto& cluster : spec.world.clusters) {
      for (int i = 0; i < cluster.count; ++i) {
        Vec3 offset;
        for (int d = 0; d < 3; ++d) {
          offset[d] = (2.0 * u01(rng) - 1.0) * cluster.radius;
        }
        landmarks.push_back({cluster.center + offset, cluster.velocity, true});
      }
    }
  }

  const int n_frames =
      static_cast<int>(std::round(spec.traj.duration * spec.traj.frame_rate)) + 1;
  const auto blur_level = [&spec](int frame) {
    if (spec.noise.blur_schedule.empty()) return 0.0;
    return spec.noise.blur_schedule[std::min<size_t>(
        frame, spec.noise.blur_schedule.size() - 1)];
  };

  std::mt19937_64 noise_rng = seed_stream(spec.world.seed, "pixel-noise");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  for (int k = 0; k < n_frames; ++k) {
    const double t = k / spec.traj.frame_rate;
    const SimPose pose = trajectory_pose(spec.traj, t);
    sim.poses.push_back(pose);

    Frame frame;
    frame.index = k;
    frame.t = t;
    const double sigma =
        spec.noise.sigma_px * (1.0 + spec.noise.blur_noise_gain * blur_level(k));

    for (size_t id = 0; id < landmarks.size(); ++id) {
      const Vec3 q_w = landmarks[id].p0 + landmarks[id].velocity * t;
      const Vec3 p_c = pose.C_cw * (q_w - pose.position);
      if (p_c.z() < 0.5) continue;
      ImagePoint y_true;
      try {
        y_true = project(spec.cam, p_c);
      } catch (const DomainError&) {
        continue;
      }
      const auto inside = [&spec](const ImagePoint& y) {
        return y.u_l >= 0.0 && y.u_l < spec.cam.image_width && y.v_l >= 0.0 &&
               y.v_l < spec.cam.image_height && y.u_r >= 0.0 &&
               y.u_r < spec.cam.image_width && y.v_r >= 0.0 &&
               y.v_r < spec.cam.image_height;
      };
      if (!inside(y_true) || y_true.disparity() < 2.0 * kMinDisparity) continue;

      ImagePoint y = y_true;
      bool outlier = false;
      if (sigma > 0.0) {
        y.u_l += sigma * gauss(noise_rng);
        y.v_l += sigma * gauss(noise_rng);
        y.u_r += sigma * gauss(noise_rng);
        y.v_r += sigma * gauss(noise_rng);
      }
      if (spec.noise.outlier_prob > 0.0 &&
          u01(noise_rng) < spec.noise.outlier_prob) {
        const double angle = 2.0 * M_PI * u01(noise_rng);
        const double du = spec.noise.outlier_px * std::cos(angle);
        const double dv = spec.noise.outlier_px * std::sin(angle);
        y.u_l += du;
        y.v_l += dv;
        y.u_r += du; // disparity preserved: a plausible but wrong match
        y.v_r += dv;
        outlier = true;
      }
      if (!inside(y) || y.disparity() < kMinDisparity) continue;

      frame.features.push_back({static_cast<int>(id), y});
      sim.truth_observations[{k, static_cast<int>(id)}] = y_true;
      ds.labels[{k, static_cast<int>(id)}] =
          outlier ? FeatureLabel::outlier
                  : (landmarks[id].moving ? FeatureLabel::moving
                                          : FeatureLabel::static_point);
    }
    if (frame.features.size() < 3) {
      throw SimError("frame " + std::to_string(k) +
                     ": fewer than 3 visible landmarks");
    }
    ds.frames.push_back(std::move(frame));
  }

  // IMU stream: piecewise-constant rates reproducing the exact inter-sample
  // rotations under the pipeline's integration convention.
  {
    std::mt19937_64 gyro_rng = seed_stream(spec.world.seed, "gyro-noise");
    const double dt = 1.0 / spec.traj.imu_rate;
    const int n_samples =
        static_cast<int>(std::round(spec.traj.duration * spec.traj.imu_rate));
    for (int j = 0; j < n_samples; ++j) {
      const double t0 = j * dt;
      const double t1 = (j + 1) * dt;
      const Mat3 C0 = trajectory_pose(spec.traj, t0).C_cw;
      const Mat3 C1 = trajectory_pose(spec.traj, t1).C_cw;
      const Mat3 psi_cam = C1 * C0.transpose();
      const Mat3 psi_imu =
          spec.rig.C_cv.transpose() * psi_cam * spec.rig.C_cv;
      Vec3 omega = axis_angle_log(psi_imu) / dt;
      omega += spec.noise.gyro_bias;
      if (spec.noise.sigma_gyro > 0.0) {
        for (int d = 0; d < 3; ++d) {
          omega[d] += spec.noise.sigma_gyro * gauss(gyro_rng);
        }
      }
      // kinematic acceleration in the camera frame (no gravity term)
      const Vec3 pm = trajectory_pose(spec.traj, std::max(0.0, t0 - dt)).position;
      const Vec3 p0 = trajectory_pose(spec.traj, t0).position;
      const Vec3 p1 = trajectory_pose(spec.traj, t1).position;
      const Vec3 a_w = (p1 - 2.0 * p0 + pm) / (dt * dt);
      TimedImu s;
      s.t = t0;
      s.sample.omega = omega;
      s.sample.accel = C0 * a_w;
      s.sample.dt = dt;
      ds.imu.push_back(s);
    }
  }

  // Ground truth in the initial camera frame.
  {
    const auto emit = [&](int k) {
      const SimPose& p = sim.poses[k];
      ds.ground_truth.push_back({p.t, p.position});
    };
    switch (spec.gt_density) {
      case GroundTruthDensity::every_frame:
        for (int k = 0; k < n_frames; ++k) emit(k);
        break;
      case GroundTruthDensity::every_nth:
        for (int k = 0; k < n_frames; k += std::max(1, spec.gt_stride)) emit(k);
        if ((n_frames - 1) % std::max(1, spec.gt_stride) != 0) emit(n_frames - 1);
        break;
      case GroundTruthDensity::endpoints_only:
        emit(0);
        emit(n_frames - 1);
        break;
      case GroundTruthDensity::none:
        break;
    }
  }

  if (spec.render_images) {
    sim.images.reserve(ds.frames.size());
    for (int k = 0; k < n_frames; ++k) {
      sim.images.push_back(render_frame(spec, sim, k));
    }
  } else {
    // No imagery: provide the image-derived predictor entries directly so
    // the ingestion contract (images absent -> predictors.csv) holds.
    std::mt19937_64 rng = seed_stream(spec.world.seed, "synthetic-predictors");
    std::normal_distribution<double> jitter(0.0, 0.05);
    for (const Frame& frame : ds.frames) {
      const double blur = blur_level(frame.index);
      for (const auto& feat : frame.features) {
        PredictorVector pi = PredictorVector::Zero();
        pi[2] = 5.0 + jitter(rng);        // entropy [bits]
        pi[3] = std::clamp(0.3 + 0.6 * blur + jitter(rng), 0.0, 1.0);
        pi[5] = 1.0 + jitter(rng);        // f_low
        pi[6] = 0.5 * (1.0 - blur) + jitter(rng); // blur kills high frequencies
        ds.predictors[{frame.index, feat.track_id}] = pi;
      }
    }
  }

  return sim;
}

Image render_frame(const SimSpec& spec, const SimResult& sim, int frame_idx) {
  Image img(spec.cam.image_width, spec.cam.image_height, 96);
  // mild horizontal gradient so the background is not perfectly flat
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      img.at(x, y) = static_cast<uint8_t>(96 + (32 * x) / img.width);
    }
  }
  constexpr int kStamp = 33;
  for (const auto& feat : sim.dataset.frames[frame_idx].features) {
    const auto it = sim.truth_observations.find({frame_idx, feat.track_id});
    if (it == sim.truth_observations.end()) continue;
    const int cx = static_cast<int>(std::lround(it->second.u_l));
    const int cy = static_cast<int>(std::lround(it->second.v_l));
    std::mt19937_64 tex =
        seed_stream(spec.world.seed, "texture",
                    static_cast<uint64_t>(feat.track_id));
    std::uniform_int_distribution<int> level(0, 255);
    for (int dy = -kStamp / 2; dy <= kStamp / 2; ++dy) {
      for (int dx = -kStamp / 2; dx <= kStamp / 2; ++dx) {
        const int x = cx + dx;
        const int y = cy + dy;
        const int v = level(tex);
        if (x < 0 || x >= img.width || y < 0 || y >= img.height) continue;
        img.at(x, y) = static_cast<uint8_t>(v);
      }
    }
  }
  const double blur =
      spec.noise.blur_schedule.empty()
          ? 0.0
          : spec.noise.blur_schedule[std::min<size_t>(
                frame_idx, spec.noise.blur_schedule.size() - 1)];
  return gaussian_blur(img, 4.0 * blur);
}

void write_sim(const SimResult& sim, const std::string& dir) {
  save_dataset(sim.dataset, dir);
  const fs::path root(dir);
  {
    std::ofstream out(root / "poses_gt.csv");
    if (!out) throw IoError("cannot write poses_gt.csv in " + dir);
    out << std::setprecision(17);
    out << "t,x,y,z,r00,r01,r02,r10,r11,r12,r20,r21,r22\n";
    for (const auto& p : sim.poses) {
      out << p.t << "," << p.position.x() << "," << p.position.y() << ","
          << p.position.z();
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) out << "," << p.C_cw(r, c);
      }
      out << "\n";
    }
  }
  if (!sim.images.empty()) {
    fs::create_directories(root / "images");
    for (size_t k = 0; k < sim.images.size(); ++k) {
      std::ostringstream name;
      name << std::setw(6) << std::setfill('0') << k << ".pgm";
      write_pgm(sim.images[k], (root / "images" / name.str()).string());
    }
  }
}

} // namespace probe
