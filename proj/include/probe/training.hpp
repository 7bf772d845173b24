#pragma once

#include "probe/frontend.hpp"
#include "probe/probe_model.hpp"

namespace probe {

struct TrainConfig {
  int iterations = 10;          // learning iterations L
  double subset_fraction = 0.5; // random feature subset per step
  std::optional<RmseMode> mode; // default: chosen from ground-truth density
  std::vector<int> k_candidates = {1, 2, 3, 5, 8, 12, 20};
  std::vector<double> gamma_candidates = {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0};
  bool select_hyperparams = true;
  int fixed_k = 5;
  double fixed_gamma = 1.0;
  FrontendConfig frontend;
};

struct TrainReport {
  RmseMode mode = RmseMode::per_step;
  size_t theta_size = 0;
  double alpha_bar = 0.0;
  int k = 0;
  double gamma = 0.0;
  int skipped_steps = 0;
  std::vector<double> per_iteration_rmse; // mean alpha per iteration
  double training_armse = 0.0;            // probe re-run with chosen params
};

/// Picks per_step when every frame has ground truth, windowed when it is
/// sparse, loop_closure when there is none (the path must then close).
RmseMode choose_rmse_mode(const Dataset& ds);

/// Runs the training traversals, harvests (pi, alpha) samples, selects K
/// and gamma, and returns the finished model.
ProbeModel train_probe_model(const Dataset& ds, const TrainConfig& cfg,
                             TrainReport* report = nullptr);

/// ARMSE (or loop-closure error without ground truth) of a probe-mode run
/// with the given model over the dataset.
double evaluate_model_armse(const Dataset& ds, const ProbeModel& model,
                            const FrontendConfig& cfg);

} // namespace probe
