#include "probe/geometry.hpp"

#include <cmath>

namespace probe {

ImagePoint project(const StereoCamera& cam, const Vec3& p) {
  if (!(p.z() > 0.0)) {
    throw DomainError("project: non-positive depth");
  }
  const double inv_z = 1.0 / p.z();
  ImagePoint y;
  y.u_l = cam.f * p.x() * inv_z + cam.c_u;
  y.v_l = cam.f * p.y() * inv_z + cam.c_v;
  y.u_r = cam.f * (p.x() - cam.b) * inv_z + cam.c_u;
  y.v_r = cam.f * p.y() * inv_z + cam.c_v;
  return y;
}

Vec3 unproject(const StereoCamera& cam, const ImagePoint& y) {
  const double d = y.disparity();
  if (d < kMinDisparity) {
    throw DomainError("unproject: degenerate disparity");
  }
  const double z = cam.f * cam.b / d;
  // Rectification forces v_l == v_r; under noise we take the average.
  const double v = 0.5 * (y.v_l + y.v_r);
  return Vec3((y.u_l - cam.c_u) * z / cam.f, (v - cam.c_v) * z / cam.f, z);
}

Mat34 unproject_jacobian(const StereoCamera& cam, const ImagePoint& y) {
  const double d = y.disparity();
  if (d < kMinDisparity) {
    throw DomainError("unproject_jacobian: degenerate disparity");
  }
  const double z = cam.f * cam.b / d;
  const double dz_dul = -cam.f * cam.b / (d * d);
  const double dz_dur = -dz_dul;
  const double xu = (y.u_l - cam.c_u) / cam.f;
  const double yv = (0.5 * (y.v_l + y.v_r) - cam.c_v) / cam.f;

  Mat34 J;
  // columns: u_l, v_l, u_r, v_r
  J(0, 0) = z / cam.f + xu * dz_dul;
  J(0, 1) = 0.0;
  J(0, 2) = xu * dz_dur;
  J(0, 3) = 0.0;

  J(1, 0) = yv * dz_dul;
  J(1, 1) = 0.5 * z / cam.f;
  J(1, 2) = yv * dz_dur;
  J(1, 3) = 0.5 * z / cam.f;

  J(2, 0) = dz_dul;
  J(2, 1) = 0.0;
  J(2, 2) = dz_dur;
  J(2, 3) = 0.0;
  return J;
}

Mat3 axis_angle_matrix(const Vec3& psi) {
  const double angle = psi.norm();
  if (angle < 1e-12) {
    const Mat3 s = skew(psi);
    return Mat3::Identity() - s + 0.5 * s * s;
  }
  const Vec3 axis = psi / angle;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return c * Mat3::Identity() + (1.0 - c) * axis * axis.transpose() -
         s * skew(axis);
}

Vec3 axis_angle_log(const Mat3& C) {
  // C = exp(-psi^x); standard log of C^T gives psi.
  const Mat3 R = C.transpose();
  const double tr = std::min(3.0, std::max(-1.0, R.trace()));
  const double c = 0.5 * (tr - 1.0);
  const double angle = std::acos(std::min(1.0, std::max(-1.0, c)));
  if (angle < 1e-12) {
    return Vec3(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1)) * 0.5;
  }
  if (angle > M_PI - 1e-6) {
    // near pi: axis from the symmetric part
    Mat3 S = 0.5 * (R + R.transpose());
    Vec3 axis = ((S.diagonal().array() - c) / (1.0 - c)).cwiseMax(0.0).sqrt();
    // fix signs from off-diagonals
    if (S(0, 1) < 0) axis.y() = -axis.y();
    if (S(0, 2) < 0) axis.z() = -axis.z();
    if (axis.norm() > 0) axis.normalize();
    return axis * angle;
  }
  Vec3 w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  return w * (angle / (2.0 * std::sin(angle)));
}

Mat3 integrate_gyro(const std::vector<ImuSample>& samples,
                    const RigCalibration& rig) {
  Mat3 prod = Mat3::Identity();
  for (const ImuSample& s : samples) {
    if (!(s.dt > 0.0)) {
      throw DomainError("integrate_gyro: non-positive sample period");
    }
    prod = axis_angle_matrix(s.omega * s.dt) * prod;
  }
  return rig.C_cv * prod * rig.C_cv.transpose();
}

} // namespace probe
