#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "probe/geometry.hpp"
#include "probe/random.hpp"

#include <Eigen/Geometry>

using namespace probe;

namespace {

const StereoCamera kCam{100.0, 0.5, 50.0, 50.0, 100, 100};

StereoCamera wide_cam() { return {400.0, 0.3, 320.0, 240.0, 640, 480}; }

Mat3 quaternion_rotation(const Vec3& psi) {
  // oracle: axis_angle_matrix(psi) == rotation by -|psi| about psi-hat
  const double angle = psi.norm();
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(-angle, psi / angle).toRotationMatrix();
}

} // namespace

TEST_CASE("project on-axis and off-axis points") {
  ImagePoint y = project(kCam, Vec3(0, 0, 10));
  CHECK(y.u_l == doctest::Approx(50.0));
  CHECK(y.v_l == doctest::Approx(50.0));
  CHECK(y.u_r == doctest::Approx(45.0));
  CHECK(y.v_r == doctest::Approx(50.0));

  y = project(kCam, Vec3(1, 2, 10));
  CHECK(y.u_l == doctest::Approx(60.0));
  CHECK(y.v_l == doctest::Approx(70.0));
  CHECK(y.u_r == doctest::Approx(55.0));
  CHECK(y.v_r == doctest::Approx(70.0));
}

TEST_CASE("project rejects non-positive depth") {
  CHECK_THROWS_AS(project(kCam, Vec3(0, 0, 0)), DomainError);
  CHECK_THROWS_AS(project(kCam, Vec3(0, 0, -1)), DomainError);
}

TEST_CASE("unproject inverts the worked examples") {
  Vec3 p = unproject(kCam, {50, 50, 45, 50});
  CHECK((p - Vec3(0, 0, 10)).norm() < 1e-12);
  p = unproject(kCam, {60, 70, 55, 70});
  CHECK((p - Vec3(1, 2, 10)).norm() < 1e-12);
}

TEST_CASE("unproject rejects degenerate disparity") {
  CHECK_THROWS_AS(unproject(kCam, {50, 50, 50, 50}), DomainError);
  CHECK_THROWS_AS(unproject(kCam, {50, 50, 51, 50}), DomainError);
}

TEST_CASE("round-trip identity over random points") {
  const StereoCamera cam = wide_cam();
  auto rng = seed_stream(7, "roundtrip");
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double z = 1.0 + 49.0 * u01(rng);
    const Vec3 p((2.0 * u01(rng) - 1.0) * z, (2.0 * u01(rng) - 1.0) * z * 0.5,
                 z);
    const Vec3 back = unproject(cam, project(cam, p));
    worst = std::max(worst, (back - p).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("unproject_jacobian matches central finite differences") {
  const StereoCamera cam = wide_cam();
  auto rng = seed_stream(11, "jacobian");
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double h = 1e-4;
  for (int trial = 0; trial < 200; ++trial) {
    const double z = 1.5 + 30.0 * u01(rng);
    const Vec3 p((2.0 * u01(rng) - 1.0) * 0.4 * z,
                 (2.0 * u01(rng) - 1.0) * 0.3 * z, z);
    const ImagePoint y = project(cam, p);
    const Mat34 J = unproject_jacobian(cam, y);
    for (int col = 0; col < 4; ++col) {
      Vec4 yp = y.vec();
      Vec4 ym = y.vec();
      yp[col] += h;
      ym[col] -= h;
      const Vec3 fd =
          (unproject(cam, ImagePoint::from_vec(yp)) -
           unproject(cam, ImagePoint::from_vec(ym))) /
          (2.0 * h);
      for (int row = 0; row < 3; ++row) {
        const double scale = std::max(1.0, std::abs(fd[row]));
        CHECK(std::abs(J(row, col) - fd[row]) / scale < 1e-5);
      }
    }
  }
}

TEST_CASE("on-axis depth is independent of vertical coordinates") {
  const ImagePoint y = project(kCam, Vec3(0, 0, 10));
  const Mat34 J = unproject_jacobian(kCam, y);
  CHECK(J(2, 1) == doctest::Approx(0.0));
  CHECK(J(2, 3) == doctest::Approx(0.0));
}

TEST_CASE("doubling baseline doubles depth for fixed pixels") {
  StereoCamera cam = wide_cam();
  const ImagePoint y{330, 250, 310, 250};
  const Vec3 p1 = unproject(cam, y);
  StereoCamera cam2 = cam;
  cam2.b *= 2.0;
  const Vec3 p2 = unproject(cam2, y);
  CHECK(p2.z() == doctest::Approx(2.0 * p1.z()));
  // the disparity column of the Jacobian scales with b as well
  const Mat34 J1 = unproject_jacobian(cam, y);
  const Mat34 J2 = unproject_jacobian(cam2, y);
  CHECK(J2(2, 0) == doctest::Approx(2.0 * J1(2, 0)));
}

TEST_CASE("axis_angle_matrix worked examples") {
  CHECK((axis_angle_matrix(Vec3::Zero()) - Mat3::Identity()).norm() < 1e-15);

  const Mat3 C = axis_angle_matrix(Vec3(0, 0, M_PI / 2));
  Mat3 expected;
  expected << 0, 1, 0, -1, 0, 0, 0, 0, 1;
  CHECK((C - expected).norm() < 1e-12);
}

TEST_CASE("axis_angle_matrix is a rotation and matches the quaternion oracle") {
  auto rng = seed_stream(3, "axisangle");
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const Vec3 psi(gauss(rng), gauss(rng), gauss(rng));
    const Mat3 C = axis_angle_matrix(psi);
    CHECK((C.transpose() * C - Mat3::Identity()).norm() < 1e-12);
    CHECK(std::abs(C.determinant() - 1.0) < 1e-12);
    CHECK((C - quaternion_rotation(psi)).norm() < 1e-12);
  }
}

TEST_CASE("axis_angle small-angle branch stays continuous") {
  const Vec3 psi(1e-13, -2e-13, 5e-14);
  const Mat3 C = axis_angle_matrix(psi);
  CHECK((C.transpose() * C - Mat3::Identity()).norm() < 1e-12);
  CHECK((C - (Mat3::Identity() - skew(psi))).norm() < 1e-24);
}

TEST_CASE("axis_angle_log inverts axis_angle_matrix") {
  auto rng = seed_stream(5, "log");
  std::normal_distribution<double> gauss(0.0, 0.8);
  for (int i = 0; i < 300; ++i) {
    Vec3 psi(gauss(rng), gauss(rng), gauss(rng));
    if (psi.norm() >= M_PI) psi *= (M_PI - 1e-3) / psi.norm();
    const Vec3 back = axis_angle_log(axis_angle_matrix(psi));
    CHECK((back - psi).norm() < 1e-9);
  }
}

TEST_CASE("integrate_gyro basics") {
  RigCalibration rig;
  CHECK((integrate_gyro({}, rig) - Mat3::Identity()).norm() == 0.0);

  std::vector<ImuSample> still(10, {Vec3::Zero(), Vec3::Zero(), 0.01});
  CHECK((integrate_gyro(still, rig) - Mat3::Identity()).norm() < 1e-15);

  // constant single-axis rate composes to a single rotation
  const Vec3 omega(0, 0, 0.5);
  std::vector<ImuSample> samples(20, {omega, Vec3::Zero(), 0.05});
  const Mat3 C = integrate_gyro(samples, rig);
  CHECK((C - axis_angle_matrix(omega * 20 * 0.05)).norm() < 1e-10);
}

TEST_CASE("integrate_gyro matches an incremental quaternion oracle") {
  auto rng = seed_stream(9, "gyro");
  std::normal_distribution<double> gauss(0.0, 1.0);
  RigCalibration rig;
  rig.C_cv = axis_angle_matrix(Vec3(0.3, -0.2, 0.9));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ImuSample> samples;
    Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
    for (int j = 0; j < 100; ++j) {
      const Vec3 omega(gauss(rng), gauss(rng), gauss(rng));
      samples.push_back({omega, Vec3::Zero(), 0.01});
      const Vec3 psi = omega * 0.01;
      q = Eigen::Quaterniond(
              Eigen::AngleAxisd(-psi.norm(), psi.normalized())) *
          q;
    }
    const Mat3 oracle = rig.C_cv * q.toRotationMatrix() * rig.C_cv.transpose();
    const Mat3 C = integrate_gyro(samples, rig);
    const double angle_err = axis_angle_log(oracle.transpose() * C).norm();
    CHECK(angle_err < 1e-8);
  }
}

TEST_CASE("integrate_gyro is composition-consistent") {
  auto rng = seed_stream(13, "compose");
  std::normal_distribution<double> gauss(0.0, 0.5);
  RigCalibration rig;
  std::vector<ImuSample> samples;
  for (int j = 0; j < 40; ++j) {
    samples.push_back({Vec3(gauss(rng), gauss(rng), gauss(rng)),
                       Vec3::Zero(), 0.02});
  }
  const std::vector<ImuSample> first(samples.begin(), samples.begin() + 17);
  const std::vector<ImuSample> second(samples.begin() + 17, samples.end());
  const Mat3 whole = integrate_gyro(samples, rig);
  const Mat3 split = integrate_gyro(second, rig) * integrate_gyro(first, rig);
  CHECK((whole - split).norm() < 1e-12);
}
