#include "probe/training.hpp"

#include "probe/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace probe {

RmseMode choose_rmse_mode(const Dataset& ds) {
  if (!ds.has_ground_truth()) return RmseMode::loop_closure;
  size_t matched = 0;
  for (const auto& f : ds.frames) {
    if (ds.ground_truth_at(f.t)) ++matched;
  }
  if (matched == ds.frames.size()) return RmseMode::per_step;
  return RmseMode::windowed;
}

namespace {

struct HarvestedSample {
  PredictorVector pi;
  double alpha;
};

} // namespace

double evaluate_model_armse(const Dataset& ds, const ProbeModel& model,
                            const FrontendConfig& cfg) {
  const SequenceResult res =
      run_sequence(ds, EstimatorMode::probe, &model, cfg);
  if (res.has_gt_metrics) return res.armse;
  return res.loop_closure_error;
}

ProbeModel train_probe_model(const Dataset& ds, const TrainConfig& cfg,
                             TrainReport* report) {
  if (cfg.iterations < 1) throw ModelError("train: iterations must be >= 1");
  const RmseMode mode = cfg.mode.value_or(choose_rmse_mode(ds));
  if (!ds.has_ground_truth() && mode != RmseMode::loop_closure) {
    throw ModelError("train: dataset has no ground truth and mode is not "
                     "loop_closure");
  }
  if (ds.frames.size() < 2) throw ModelError("train: too few frames");

  // Pairs, predictor vectors, and rotation priors do not depend on the
  // subset, so compute them once.
  std::vector<FramePair> pairs;
  std::vector<std::map<int, PredictorVector>> pair_pis;
  std::vector<Mat3> rotation_priors;
  for (size_t i = 0; i + 1 < ds.frames.size(); ++i) {
    pairs.push_back(make_frame_pair(ds, i));
    pair_pis.push_back(
        compute_pair_predictors(ds, pairs.back(), cfg.frontend.predictors));
    rotation_priors.push_back(integrate_gyro(pairs.back().imu_window, ds.rig));
  }

  std::vector<PredictorVector> raw_pis;
  std::vector<double> alphas;
  int skipped = 0;
  std::vector<double> per_iter_mean;

  const auto gt_origin = ds.has_ground_truth()
                             ? ds.ground_truth_at(ds.frames.front().t)
                             : std::nullopt;

  for (int l = 0; l < cfg.iterations; ++l) {
    std::mt19937_64 rng =
        seed_stream(cfg.frontend.seed, "train-subset", static_cast<uint64_t>(l));

    Vec3 pos = Vec3::Zero();
    Mat3 C_chain = Mat3::Identity();
    std::vector<Vec3> est_path{pos};
    std::vector<double> est_times{ds.frames.front().t};

    // pi vectors awaiting an alpha (windowed / path modes)
    std::vector<PredictorVector> pending;
    Vec3 anchor_pos = pos;
    std::optional<Vec3> anchor_gt = gt_origin;

    std::vector<double> iter_alphas;

    auto attach = [&](const std::vector<PredictorVector>& pis, double alpha) {
      for (const auto& pi : pis) {
        raw_pis.push_back(pi);
        alphas.push_back(alpha);
      }
      if (!pis.empty()) iter_alphas.push_back(alpha);
    };

    for (size_t s = 0; s < pairs.size(); ++s) {
      const FramePair& pair = pairs[s];
      std::vector<size_t> order(pair.matches.size());
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      const size_t subset_size = std::max<size_t>(
          3, static_cast<size_t>(
                 std::ceil(cfg.subset_fraction * pair.matches.size())));

      std::vector<Correspondence> corrs;
      std::vector<PredictorVector> subset_pis;
      for (size_t j = 0; j < order.size() && corrs.size() < subset_size; ++j) {
        const MatchedPair& m = pair.matches[order[j]];
        corrs.push_back(
            make_correspondence(ds.cam, m.y_a, m.y_b, cfg.frontend.sigma_px));
        subset_pis.push_back(pair_pis[s].at(m.track_id));
      }

      const Mat3& C_bar = rotation_priors[s];
      bool solved = false;
      Pose inc;
      inc.C = C_bar;
      if (corrs.size() >= 3) {
        try {
          inc.r = direct_solution(corrs, C_bar);
          inc = refine(corrs, inc, ds.cam, cfg.frontend.solver).pose;
          solved = true;
        } catch (const EstimatorError&) {
          ++skipped;
          try {
            inc.r = direct_solution(corrs, C_bar);
          } catch (const EstimatorError&) {
            inc.r = Vec3::Zero();
          }
        }
      } else {
        ++skipped;
        inc.r = Vec3::Zero();
      }

      const Vec3 prev_pos = pos;
      const Vec3 step_world = C_chain.transpose() * inc.r;
      pos += step_world;
      C_chain = inc.C * C_chain;
      est_path.push_back(pos);
      est_times.push_back(pair.t_b);

      if (!solved) continue;

      if (mode == RmseMode::per_step) {
        const auto gt_a = ds.ground_truth_at(pair.t_a);
        const auto gt_b = ds.ground_truth_at(pair.t_b);
        if (gt_a && gt_b) {
          const double alpha =
              ((pos - prev_pos) - (*gt_b - *gt_a)).norm();
          attach(subset_pis, alpha);
        }
      } else if (mode == RmseMode::windowed) {
        pending.insert(pending.end(), subset_pis.begin(), subset_pis.end());
        const auto gt_b = ds.ground_truth_at(pair.t_b);
        if (gt_b && anchor_gt) {
          const double alpha =
              ((pos - anchor_pos) - (*gt_b - *anchor_gt)).norm();
          attach(pending, alpha);
          pending.clear();
          anchor_pos = pos;
          anchor_gt = gt_b;
        }
      } else {
        pending.insert(pending.end(), subset_pis.begin(), subset_pis.end());
      }
    }

    if (mode == RmseMode::full_path) {
      std::vector<Vec3> est_at_gt, gt_at;
      for (size_t i = 0; i < est_path.size(); ++i) {
        const auto gt = ds.ground_truth_at(est_times[i]);
        if (gt && gt_origin) {
          est_at_gt.push_back(est_path[i]);
          gt_at.push_back(*gt - *gt_origin);
        }
      }
      if (!est_at_gt.empty()) {
        attach(pending, compute_rmse(est_at_gt, gt_at, RmseMode::full_path));
      }
      pending.clear();
    } else if (mode == RmseMode::loop_closure) {
      attach(pending, compute_rmse(est_path, {}, RmseMode::loop_closure));
      pending.clear();
    }

    per_iter_mean.push_back(
        iter_alphas.empty()
            ? 0.0
            : std::accumulate(iter_alphas.begin(), iter_alphas.end(), 0.0) /
                  static_cast<double>(iter_alphas.size()));
  }

  ProbeModel model;
  model.theta = TrainingSet::build(raw_pis, alphas);
  model.camera_id = ds.camera_id;
  model.predictor_config_hash = cfg.frontend.predictors.hash();

  if (cfg.select_hyperparams) {
    std::vector<int> k_cands;
    for (int k : cfg.k_candidates) {
      if (static_cast<size_t>(k) <= model.theta.samples.size()) {
        k_cands.push_back(k);
      }
    }
    if (k_cands.empty()) k_cands.push_back(1);
    model.k = select_k(model.theta, k_cands);
    model.build_index();
    model.gamma = select_gamma(cfg.gamma_candidates, [&](double g) {
      ProbeModel trial = model;
      trial.gamma = g;
      trial.build_index();
      return evaluate_model_armse(ds, trial, cfg.frontend);
    });
  } else {
    model.k = cfg.fixed_k;
    model.gamma = cfg.fixed_gamma;
  }
  model.build_index();

  if (report) {
    report->mode = mode;
    report->theta_size = model.theta.samples.size();
    report->alpha_bar = model.theta.alpha_bar;
    report->k = model.k;
    report->gamma = model.gamma;
    report->skipped_steps = skipped;
    report->per_iteration_rmse = per_iter_mean;
    report->training_armse =
        evaluate_model_armse(ds, model, cfg.frontend);
  }
  return model;
}

} // namespace probe
