#pragma once

#include "probe/geometry.hpp"

#include <optional>
#include <vector>

namespace probe {

struct EstimatorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One landmark tracked across a frame pair, with triangulations and
/// image-space covariances. beta > 1 de-weights the observation.
struct Correspondence {
  ImagePoint y_a;
  ImagePoint y_b;
  Vec3 p_a = Vec3::Zero();
  Vec3 p_b = Vec3::Zero();
  Mat4 R_a = Mat4::Identity(); // image covariance in frame a [px^2]
  Mat4 R_b = Mat4::Identity();
  double beta = 1.0;
};

Correspondence make_correspondence(const StereoCamera& cam,
                                   const ImagePoint& y_a,
                                   const ImagePoint& y_b,
                                   double sigma_px = 0.5, double beta = 1.0);

struct SolverConfig {
  int max_iterations = 50;
  double convergence_tol = 1e-10;
  double lambda_init = 1e-4;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  int max_inner_retries = 20;
};

struct LinearizedSystem {
  Mat6 A = Mat6::Zero();
  Vec6 b = Vec6::Zero();
  int used = 0;    // correspondences contributing
  int dropped = 0; // near-singular weights skipped
};

struct RefineResult {
  Pose pose;
  double final_cost = 0.0;
  int iterations = 0;
  int dropped_correspondences = 0;
};

/// Closed-form translation from point cloud centroids given a rotation
/// prior: r = -C^T u_b + u_a.
Vec3 direct_solution(const std::vector<Correspondence>& corrs, const Mat3& C);

/// Information matrix from the propagated image covariances of both frames.
/// Throws NearSingularWeight when the inner matrix is ill-conditioned.
struct NearSingularWeight : EstimatorError {
  using EstimatorError::EstimatorError;
};

Mat3 gamma_from_parts(const Mat34& G_a, const Mat34& G_b, const Mat4& R_a,
                      const Mat4& R_b, const Mat3& C, double beta);
Mat3 gamma_weight(const Correspondence& corr, const Mat3& C,
                  const StereoCamera& cam);

/// Weighted alignment cost 1/2 sum e^T Gamma e with e = p_b - C(p_a - r).
/// Weights are recomputed from the supplied pose; correspondences whose
/// weight is near-singular are skipped.
double cost(const std::vector<Correspondence>& corrs, const Pose& pose,
            const StereoCamera& cam);

/// Same cost with caller-provided fixed weights (one per correspondence,
/// nullopt = dropped).
double cost_fixed_weights(const std::vector<Correspondence>& corrs,
                          const Pose& pose,
                          const std::vector<std::optional<Mat3>>& weights);

std::vector<std::optional<Mat3>> compute_weights(
    const std::vector<Correspondence>& corrs, const Mat3& C,
    const StereoCamera& cam);

LinearizedSystem build_linear_system(const std::vector<Correspondence>& corrs,
                                     const Pose& pose, const StereoCamera& cam);
LinearizedSystem build_linear_system_fixed_weights(
    const std::vector<Correspondence>& corrs, const Pose& pose,
    const std::vector<std::optional<Mat3>>& weights);

/// xi = [eps; phi]: r += eps, C <- axis_angle_matrix(phi) * C.
Pose apply_update(const Pose& pose, const Vec6& xi);

/// Damped Gauss-Newton refinement from an initial guess. Accepted steps
/// never increase the (fixed-weight) cost.
RefineResult refine(const std::vector<Correspondence>& corrs,
                    const Pose& initial, const StereoCamera& cam,
                    const SolverConfig& cfg = {});

} // namespace probe
