#include "probe/estimator.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace probe {

Correspondence make_correspondence(const StereoCamera& cam,
                                   const ImagePoint& y_a,
                                   const ImagePoint& y_b, double sigma_px,
                                   double beta) {
  Correspondence c;
  c.y_a = y_a;
  c.y_b = y_b;
  c.p_a = unproject(cam, y_a);
  c.p_b = unproject(cam, y_b);
  c.R_a = Mat4::Identity() * sigma_px * sigma_px;
  c.R_b = Mat4::Identity() * sigma_px * sigma_px;
  c.beta = beta;
  return c;
}

Vec3 direct_solution(const std::vector<Correspondence>& corrs, const Mat3& C) {
  if (corrs.empty()) {
    throw EstimatorError("direct_solution: no correspondences");
  }
  Vec3 u_a = Vec3::Zero();
  Vec3 u_b = Vec3::Zero();
  for (const auto& c : corrs) {
    u_a += c.p_a;
    u_b += c.p_b;
  }
  u_a /= static_cast<double>(corrs.size());
  u_b /= static_cast<double>(corrs.size());
  return -C.transpose() * u_b + u_a;
}

Mat3 gamma_from_parts(const Mat34& G_a, const Mat34& G_b, const Mat4& R_a,
                      const Mat4& R_b, const Mat3& C, double beta) {
  const Mat3 inner = G_b * (beta * R_b) * G_b.transpose() +
                     C * (G_a * (beta * R_a) * G_a.transpose()) * C.transpose();
  Eigen::JacobiSVD<Mat3> svd(inner);
  const double smin = svd.singularValues()(2);
  const double smax = svd.singularValues()(0);
  if (!(smin > 0.0) || smax / smin > 1e12) {
    throw NearSingularWeight("gamma: near-singular inner matrix");
  }
  Mat3 gamma = inner.inverse();
  return 0.5 * (gamma + gamma.transpose()); // enforce symmetry
}

Mat3 gamma_weight(const Correspondence& corr, const Mat3& C,
                  const StereoCamera& cam) {
  const Mat34 G_a = unproject_jacobian(cam, corr.y_a);
  const Mat34 G_b = unproject_jacobian(cam, corr.y_b);
  return gamma_from_parts(G_a, G_b, corr.R_a, corr.R_b, C, corr.beta);
}

std::vector<std::optional<Mat3>> compute_weights(
    const std::vector<Correspondence>& corrs, const Mat3& C,
    const StereoCamera& cam) {
  std::vector<std::optional<Mat3>> out;
  out.reserve(corrs.size());
  for (const auto& c : corrs) {
    try {
      out.push_back(gamma_weight(c, C, cam));
    } catch (const NearSingularWeight&) {
      out.push_back(std::nullopt);
    } catch (const DomainError&) {
      out.push_back(std::nullopt);
    }
  }
  return out;
}

double cost_fixed_weights(const std::vector<Correspondence>& corrs,
                          const Pose& pose,
                          const std::vector<std::optional<Mat3>>& weights) {
  double L = 0.0;
  for (size_t i = 0; i < corrs.size(); ++i) {
    if (!weights[i]) continue;
    const Vec3 e = corrs[i].p_b - pose.C * (corrs[i].p_a - pose.r);
    L += 0.5 * e.dot(*weights[i] * e);
  }
  return L;
}

double cost(const std::vector<Correspondence>& corrs, const Pose& pose,
            const StereoCamera& cam) {
  return cost_fixed_weights(corrs, pose, compute_weights(corrs, pose.C, cam));
}

LinearizedSystem build_linear_system_fixed_weights(
    const std::vector<Correspondence>& corrs, const Pose& pose,
    const std::vector<std::optional<Mat3>>& weights) {
  if (corrs.empty()) {
    throw EstimatorError("build_linear_system: no correspondences");
  }
  LinearizedSystem sys;
  for (size_t i = 0; i < corrs.size(); ++i) {
    if (!weights[i]) {
      ++sys.dropped;
      continue;
    }
    const Vec3 rotated = pose.C * (corrs[i].p_a - pose.r);
    const Vec3 e = corrs[i].p_b - rotated;
    Eigen::Matrix<double, 3, 6> E;
    E.block<3, 3>(0, 0) = pose.C;
    E.block<3, 3>(0, 3) = -skew(rotated);
    const Mat3& W = *weights[i];
    sys.A += E.transpose() * W * E;
    sys.b -= E.transpose() * W * e;
    ++sys.used;
  }
  sys.A = 0.5 * (sys.A + sys.A.transpose());
  return sys;
}

LinearizedSystem build_linear_system(const std::vector<Correspondence>& corrs,
                                     const Pose& pose,
                                     const StereoCamera& cam) {
  return build_linear_system_fixed_weights(
      corrs, pose, compute_weights(corrs, pose.C, cam));
}

Pose apply_update(const Pose& pose, const Vec6& xi) {
  Pose out;
  out.r = pose.r + xi.head<3>();
  out.C = axis_angle_matrix(xi.tail<3>()) * pose.C;
  return out;
}

RefineResult refine(const std::vector<Correspondence>& corrs,
                    const Pose& initial, const StereoCamera& cam,
                    const SolverConfig& cfg) {
  if (corrs.size() < 3) {
    throw EstimatorError("refine: fewer than 3 correspondences");
  }
  RefineResult res;
  res.pose = initial;
  double lambda = cfg.lambda_init;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    res.iterations = iter + 1;
    // Weights are fixed at the linearization point for the whole outer
    // iteration, including damping retries.
    const auto weights = compute_weights(corrs, res.pose.C, cam);
    const LinearizedSystem sys =
        build_linear_system_fixed_weights(corrs, res.pose, weights);
    res.dropped_correspondences = sys.dropped;
    if (sys.used < 3) {
      throw EstimatorError("refine: degenerate geometry (too few usable "
                           "correspondences)");
    }
    if (iter == 0) {
      Eigen::SelfAdjointEigenSolver<Mat6> es(sys.A);
      const double ev_min = es.eigenvalues()(0);
      const double ev_max = es.eigenvalues()(5);
      if (!(ev_min > 0.0) || ev_max / ev_min > 1e14) {
        throw EstimatorError("refine: unobservable motion (degenerate "
                             "correspondence geometry)");
      }
    }
    const double cost0 = cost_fixed_weights(corrs, res.pose, weights);

    bool accepted = false;
    Vec6 xi = Vec6::Zero();
    for (int retry = 0; retry <= cfg.max_inner_retries; ++retry) {
      Mat6 damped = sys.A;
      damped.diagonal().array() += lambda;
      Eigen::LDLT<Mat6> ldlt(damped);
      if (ldlt.info() != Eigen::Success) {
        lambda *= cfg.lambda_up;
        continue;
      }
      xi = ldlt.solve(sys.b);
      if (!xi.allFinite()) {
        throw EstimatorError("refine: degenerate geometry (singular system)");
      }
      const Pose candidate = apply_update(res.pose, xi);
      const double cost1 = cost_fixed_weights(corrs, candidate, weights);
      if (cost1 <= cost0) {
        res.pose = candidate;
        res.final_cost = cost1;
        lambda = std::max(lambda * cfg.lambda_down, 1e-15);
        accepted = true;
        break;
      }
      lambda *= cfg.lambda_up;
    }
    if (!accepted) {
      res.final_cost = cost0;
      break;
    }
    if (xi.norm() < cfg.convergence_tol) {
      break;
    }
  }
  return res;
}

} // namespace probe
