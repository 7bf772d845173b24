#include "probe/frontend.hpp"

#include "probe/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace probe {

const char* mode_name(EstimatorMode mode) {
  switch (mode) {
    case EstimatorMode::nominal_ransac: return "nominal";
    case EstimatorMode::aggressive_ransac: return "aggressive";
    case EstimatorMode::probe: return "probe";
  }
  return "?";
}

EstimatorMode mode_from_name(const std::string& name) {
  if (name == "nominal") return EstimatorMode::nominal_ransac;
  if (name == "aggressive") return EstimatorMode::aggressive_ransac;
  if (name == "probe") return EstimatorMode::probe;
  throw FrontendError("unknown mode: " + name);
}

FramePair make_frame_pair(const Dataset& ds, size_t i) {
  if (i + 1 >= ds.frames.size()) {
    throw FrontendError("make_frame_pair: frame index out of range");
  }
  const Frame& a = ds.frames[i];
  const Frame& b = ds.frames[i + 1];
  FramePair pair;
  pair.frame_idx_a = a.index;
  pair.frame_idx_b = b.index;
  pair.t_a = a.t;
  pair.t_b = b.t;
  pair.left_image_path = b.image_path;

  std::map<int, const TrackedFeature*> in_a;
  for (const auto& f : a.features) in_a[f.track_id] = &f;
  for (const auto& f : b.features) {
    auto it = in_a.find(f.track_id);
    if (it == in_a.end()) continue;
    if (it->second->y.disparity() < kMinDisparity ||
        f.y.disparity() < kMinDisparity) {
      continue;
    }
    pair.matches.push_back({f.track_id, it->second->y, f.y});
  }
  pair.imu_window = ds.imu_window(pair.t_a, pair.t_b);
  return pair;
}

namespace {

Vec3 left_bearing(const StereoCamera& cam, const ImagePoint& y) {
  return Vec3((y.u_l - cam.c_u) / cam.f, (y.v_l - cam.c_v) / cam.f, 1.0)
      .normalized();
}

} // namespace

std::vector<MatchedPair> prefilter_cosine(const std::vector<MatchedPair>& matches,
                                          const Mat3& C_ba,
                                          const StereoCamera& cam,
                                          double threshold_deg) {
  const double cos_thresh = std::cos(threshold_deg * M_PI / 180.0);
  std::vector<MatchedPair> kept;
  kept.reserve(matches.size());
  for (const auto& m : matches) {
    const Vec3 b_a = C_ba * left_bearing(cam, m.y_a);
    const Vec3 b_b = left_bearing(cam, m.y_b);
    if (b_a.dot(b_b) >= cos_thresh) kept.push_back(m);
  }
  return kept;
}

int ransac_iterations(const RansacConfig& cfg) {
  const double inlier_all =
      std::pow(1.0 - cfg.outlier_fraction, cfg.min_set);
  if (inlier_all >= 1.0) return 1;
  if (inlier_all <= 0.0) {
    throw FrontendError("ransac_iterations: zero inlier probability");
  }
  const double n = std::log(1.0 - cfg.confidence) / std::log(1.0 - inlier_all);
  return std::max(1, static_cast<int>(std::ceil(n)));
}

RansacResult ransac_align(const std::vector<Correspondence>& corrs,
                          const Mat3& C_bar, const RansacConfig& cfg,
                          const SolverConfig& solver, const StereoCamera& cam,
                          std::mt19937_64& rng) {
  if (corrs.size() < static_cast<size_t>(cfg.min_set)) {
    throw FrontendError("ransac_align: fewer correspondences than minimal set");
  }
  const int iterations = ransac_iterations(cfg);
  std::uniform_int_distribution<size_t> pick(0, corrs.size() - 1);

  std::vector<size_t> best_inliers;
  for (int it = 0; it < iterations; ++it) {
    size_t s0 = pick(rng), s1 = pick(rng), s2 = pick(rng);
    while (s1 == s0) s1 = pick(rng);
    while (s2 == s0 || s2 == s1) s2 = pick(rng);
    const std::vector<Correspondence> minimal{corrs[s0], corrs[s1], corrs[s2]};
    const Vec3 r = direct_solution(minimal, C_bar);

    std::vector<size_t> inliers;
    for (size_t i = 0; i < corrs.size(); ++i) {
      const Vec3 e = corrs[i].p_b - C_bar * (corrs[i].p_a - r);
      if (e.norm() < cfg.inlier_threshold) inliers.push_back(i);
    }
    if (inliers.size() > best_inliers.size()) best_inliers = std::move(inliers);
  }
  if (best_inliers.size() < static_cast<size_t>(cfg.min_set)) {
    throw FrontendError("ransac_align: no hypothesis reached the minimal "
                        "inlier count");
  }

  std::vector<Correspondence> inlier_corrs;
  inlier_corrs.reserve(best_inliers.size());
  for (size_t i : best_inliers) {
    Correspondence c = corrs[i];
    c.beta = 1.0;
    inlier_corrs.push_back(c);
  }
  Pose init;
  init.C = C_bar;
  init.r = direct_solution(inlier_corrs, C_bar);
  RansacResult res;
  res.inliers = std::move(best_inliers);
  res.pose = refine(inlier_corrs, init, cam, solver).pose;
  return res;
}

std::map<int, PredictorVector> compute_pair_predictors(
    const Dataset& ds, const FramePair& pair, const PredictorConfig& cfg) {
  std::map<int, PredictorVector> out;
  if (pair.matches.empty()) return out;

  FlowContext flow;
  flow.positions.reserve(pair.matches.size());
  flow.flows.reserve(pair.matches.size());
  for (const auto& m : pair.matches) {
    flow.positions.emplace_back(m.y_b.u_l, m.y_b.v_l);
    flow.flows.emplace_back(m.y_b.u_l - m.y_a.u_l, m.y_b.v_l - m.y_a.v_l);
  }

  std::pair<double, double> imu_mag{0.0, 0.0};
  if (!pair.imu_window.empty()) imu_mag = imu_magnitudes(pair.imu_window);

  Image left;
  double image_blur = -1.0;
  const bool have_image = !pair.left_image_path.empty();
  if (have_image) {
    left = read_pgm(pair.left_image_path);
    image_blur = blur_metric(left, cfg.blur_kernel_size);
  }

  for (const auto& m : pair.matches) {
    PredictorVector pi = PredictorVector::Zero();
    pi[0] = imu_mag.first;
    pi[1] = imu_mag.second;
    if (have_image) {
      const auto patch = extract_patch(left, m.y_b.u_l, m.y_b.v_l, cfg.patch_size);
      pi[2] = patch_entropy(patch, cfg.entropy_bins);
      pi[3] = image_blur;
      const auto [f_low, f_high] =
          frequency_coefficients(patch, cfg.patch_size, cfg.fft_cutoff);
      pi[5] = f_low;
      pi[6] = f_high;
    } else {
      auto it = ds.predictors.find({pair.frame_idx_b, m.track_id});
      if (it == ds.predictors.end()) {
        throw FrontendError(
            "no image and no precomputed predictors for frame " +
            std::to_string(pair.frame_idx_b) + " track " +
            std::to_string(m.track_id));
      }
      pi[2] = it->second[2];
      pi[3] = it->second[3];
      pi[5] = it->second[5];
      pi[6] = it->second[6];
    }
    pi[4] = flow_variance_score(flow, m.y_b.u_l, m.y_b.v_l, cfg).score;
    out[m.track_id] = pi;
  }
  return out;
}

MotionEstimate estimate_motion(const Dataset& ds, const FramePair& pair,
                               EstimatorMode mode, const ProbeModel* model,
                               const FrontendConfig& cfg) {
  if (mode == EstimatorMode::probe && model == nullptr) {
    throw FrontendError("probe mode requires a loaded model");
  }
  MotionEstimate out;
  out.diagnostics.matched = static_cast<int>(pair.matches.size());

  const Mat3 C_bar = integrate_gyro(pair.imu_window, ds.rig);

  std::vector<MatchedPair> matches = pair.matches;
  if (mode == EstimatorMode::probe) {
    matches = prefilter_cosine(matches, C_bar, ds.cam, cfg.prefilter_deg);
  }
  out.diagnostics.prefiltered_out =
      static_cast<int>(pair.matches.size() - matches.size());
  if (matches.size() < 3) {
    throw FrontendError("estimate_motion: fewer than 3 usable matches at frame " +
                        std::to_string(pair.frame_idx_a));
  }

  std::vector<Correspondence> corrs;
  std::vector<int> track_ids;
  corrs.reserve(matches.size());
  for (const auto& m : matches) {
    corrs.push_back(make_correspondence(ds.cam, m.y_a, m.y_b, cfg.sigma_px));
    track_ids.push_back(m.track_id);
  }

  try {
    if (mode == EstimatorMode::probe) {
      std::map<int, PredictorVector> pis =
          compute_pair_predictors(ds, pair, cfg.predictors);
      for (size_t i = 0; i < corrs.size(); ++i) {
        const double beta = model->weight(pis.at(track_ids[i]));
        corrs[i].beta = beta;
        out.diagnostics.betas.push_back(beta);
      }
      Pose init;
      init.C = C_bar;
      init.r = direct_solution(corrs, C_bar);
      const RefineResult res = refine(corrs, init, ds.cam, cfg.solver);
      out.pose = res.pose;
      out.diagnostics.used = static_cast<int>(corrs.size());
      out.diagnostics.dropped_weights = res.dropped_correspondences;
      out.diagnostics.solver_iterations = res.iterations;
    } else {
      RansacConfig rcfg = cfg.ransac;
      rcfg.confidence =
          mode == EstimatorMode::aggressive_ransac ? 0.9999 : 0.99;
      std::mt19937_64 rng = seed_stream(cfg.seed, "ransac",
                                        static_cast<uint64_t>(pair.frame_idx_a));
      const RansacResult res =
          ransac_align(corrs, C_bar, rcfg, cfg.solver, ds.cam, rng);
      out.pose = res.pose;
      out.diagnostics.used = static_cast<int>(res.inliers.size());
    }
  } catch (const EstimatorError& e) {
    throw FrontendError("frame " + std::to_string(pair.frame_idx_a) + ": " +
                        e.what());
  }
  return out;
}

SequenceResult run_sequence(const Dataset& ds, EstimatorMode mode,
                            const ProbeModel* model, const FrontendConfig& cfg) {
  if (ds.frames.size() < 2) {
    throw FrontendError("run_sequence: dataset has fewer than 2 frames");
  }
  SequenceResult res;
  res.times.push_back(ds.frames.front().t);
  res.positions.push_back(Vec3::Zero());
  res.rotations.push_back(Mat3::Identity());

  for (size_t i = 0; i + 1 < ds.frames.size(); ++i) {
    FramePair pair = make_frame_pair(ds, i);
    MotionEstimate est;
    try {
      est = estimate_motion(ds, pair, mode, model, cfg);
    } catch (const FrontendError& e) {
      res.partial = true;
      res.failure = e.what();
      break;
    }
    const Mat3& C_aw = res.rotations.back();
    const Vec3 step_world = C_aw.transpose() * est.pose.r;
    res.path_length += step_world.norm();
    res.positions.push_back(res.positions.back() + step_world);
    res.rotations.push_back(est.pose.C * C_aw);
    res.times.push_back(pair.t_b);
    res.dropped_weights += est.diagnostics.dropped_weights;
    res.all_betas.insert(res.all_betas.end(), est.diagnostics.betas.begin(),
                         est.diagnostics.betas.end());
  }

  res.loop_closure_error = (res.positions.back() - res.positions.front()).norm();

  if (ds.has_ground_truth()) {
    const auto origin = ds.ground_truth_at(res.times.front());
    std::vector<double> errors;
    for (size_t i = 0; i < res.positions.size(); ++i) {
      const auto gt = ds.ground_truth_at(res.times[i]);
      if (!gt || !origin) continue;
      errors.push_back((res.positions[i] - (*gt - *origin)).norm());
    }
    if (!errors.empty()) {
      res.has_gt_metrics = true;
      res.per_frame_error = errors;
      res.armse = std::accumulate(errors.begin(), errors.end(), 0.0) /
                  static_cast<double>(errors.size());
      res.final_error = errors.back();
    }
  }
  return res;
}

} // namespace probe
