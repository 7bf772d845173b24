#pragma once

#include "probe/kdtree.hpp"
#include "probe/predictors.hpp"

#include <functional>
#include <string>
#include <vector>

namespace probe {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RmseMode { per_step, windowed, full_path, loop_closure };

/// Translational RMSE between estimated and ground-truth positions.
/// loop_closure ignores the ground truth and returns |end - start| of the
/// estimated path.
double compute_rmse(const std::vector<Vec3>& estimated,
                    const std::vector<Vec3>& ground_truth, RmseMode mode);

struct TrainingSample {
  PredictorVector pi; // standardized
  double alpha = 0.0; // attributed translational RMSE [m]
};

struct Standardization {
  PredictorVector mean = PredictorVector::Zero();
  PredictorVector stddev = PredictorVector::Ones();

  PredictorVector apply(const PredictorVector& raw) const {
    return (raw - mean).cwiseQuotient(stddev);
  }
};

/// Bag of (pi, alpha) samples harvested from training iterations.
struct TrainingSet {
  std::vector<TrainingSample> samples; // standardized pi
  Standardization stats;
  double alpha_bar = 0.0; // mean alpha over the whole set

  /// Standardizes the raw vectors, computes stats and alpha_bar.
  /// Rejects degenerate sets (alpha_bar below 1e-9 m).
  static TrainingSet build(const std::vector<PredictorVector>& raw_pis,
                           const std::vector<double>& alphas);
};

struct ProbeModel {
  TrainingSet theta;
  int k = 5;
  double gamma = 1.0;
  std::string camera_id;
  uint64_t predictor_config_hash = 0;
  bool config_hash_mismatch = false; // set by load_model on mismatch

  void build_index();

  /// alpha values of the K nearest training samples (standardized space).
  std::vector<double> knn_query(const PredictorVector& standardized_pi) const;

  /// beta = (mean neighbour alpha / alpha_bar)^gamma, clamped.
  double weight(const PredictorVector& raw_pi) const;
  double weight_standardized(const PredictorVector& standardized_pi) const;

 private:
  KdTree<kPredictorDim> index_;
};

constexpr double kBetaMin = 1e-3;
constexpr double kBetaMax = 1e6;

/// 5-fold cross-validation over neighbour-mean alpha prediction; smallest
/// K among ties.
int select_k(const TrainingSet& theta, const std::vector<int>& candidates);

/// Picks the candidate minimizing the ARMSE reported by the evaluation
/// callback (the full pipeline re-run with that gamma); smallest among ties.
double select_gamma(const std::vector<double>& candidates,
                    const std::function<double(double)>& armse_of_gamma);

void save_model(const ProbeModel& model, const std::string& path);
ProbeModel load_model(const std::string& path,
                      uint64_t expected_config_hash = 0);

} // namespace probe
