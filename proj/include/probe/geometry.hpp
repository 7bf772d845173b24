#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace probe {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rectified stereo rig intrinsics (pinhole, shared focal length).
struct StereoCamera {
  double f = 0.0;   // focal length [px]
  double b = 0.0;   // baseline [m]
  double c_u = 0.0; // principal point [px]
  double c_v = 0.0;
  int image_width = 0;
  int image_height = 0;

  bool valid() const {
    return f > 0.0 && b > 0.0 && c_u >= 0.0 && c_u < image_width &&
           c_v >= 0.0 && c_v < image_height;
  }
};

/// Stereo observation: left/right pixel coordinates.
struct ImagePoint {
  double u_l = 0.0;
  double v_l = 0.0;
  double u_r = 0.0;
  double v_r = 0.0;

  double disparity() const { return u_l - u_r; }
  Vec4 vec() const { return Vec4(u_l, v_l, u_r, v_r); }
  static ImagePoint from_vec(const Vec4& y) { return {y[0], y[1], y[2], y[3]}; }
};

/// Rigid transform between camera frames: p_b = C * (p_a - r).
struct Pose {
  Mat3 C = Mat3::Identity(); // rotation frame a -> frame b
  Vec3 r = Vec3::Zero();     // origin of b expressed in a [m]
};

struct ImuSample {
  Vec3 omega = Vec3::Zero(); // angular velocity [rad/s]
  Vec3 accel = Vec3::Zero(); // linear acceleration [m/s^2]
  double dt = 0.0;           // sample period [s]
};

struct RigCalibration {
  Mat3 C_cv = Mat3::Identity(); // rotation IMU frame -> camera frame
};

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

// Depth variance explodes as disparity -> 0; below this we refuse to
// triangulate.
constexpr double kMinDisparity = 0.1;

ImagePoint project(const StereoCamera& cam, const Vec3& p);
Vec3 unproject(const StereoCamera& cam, const ImagePoint& y);
Mat34 unproject_jacobian(const StereoCamera& cam, const ImagePoint& y);

/// Rotation from a rotation vector: cos(psi) I + (1-cos(psi)) a a^T - sin(psi) a^x
/// with a the unit axis. Note the minus on the sine term; the whole pipeline
/// (including the simulator) uses this convention.
Mat3 axis_angle_matrix(const Vec3& psi);

/// Inverse of axis_angle_matrix: recovers the rotation vector.
Vec3 axis_angle_log(const Mat3& C);

/// Accumulated inter-frame rotation C_ba from gyro samples:
/// C_cv * Psi_J ... Psi_1 * C_cv^T. Empty input yields identity.
Mat3 integrate_gyro(const std::vector<ImuSample>& samples,
                    const RigCalibration& rig);

} // namespace probe
