#include "probe/probe_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

namespace probe {

double compute_rmse(const std::vector<Vec3>& estimated,
                    const std::vector<Vec3>& ground_truth, RmseMode mode) {
  if (estimated.empty()) {
    throw ModelError("compute_rmse: empty estimate");
  }
  if (mode == RmseMode::loop_closure) {
    return (estimated.back() - estimated.front()).norm();
  }
  if (estimated.size() != ground_truth.size()) {
    throw ModelError("compute_rmse: length mismatch");
  }
  double acc = 0.0;
  for (size_t i = 0; i < estimated.size(); ++i) {
    acc += (estimated[i] - ground_truth[i]).squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(estimated.size()));
}

TrainingSet TrainingSet::build(const std::vector<PredictorVector>& raw_pis,
                               const std::vector<double>& alphas) {
  if (raw_pis.size() != alphas.size() || raw_pis.empty()) {
    throw ModelError("TrainingSet: mismatched or empty inputs");
  }
  TrainingSet set;
  const double n = static_cast<double>(raw_pis.size());

  PredictorVector mean = PredictorVector::Zero();
  for (const auto& pi : raw_pis) mean += pi;
  mean /= n;
  PredictorVector var = PredictorVector::Zero();
  for (const auto& pi : raw_pis) var += (pi - mean).cwiseAbs2();
  var /= n;
  set.stats.mean = mean;
  set.stats.stddev = var.cwiseSqrt().cwiseMax(1e-12);

  set.samples.reserve(raw_pis.size());
  double alpha_sum = 0.0;
  for (size_t i = 0; i < raw_pis.size(); ++i) {
    if (!(alphas[i] >= 0.0)) {
      throw ModelError("TrainingSet: negative alpha");
    }
    set.samples.push_back({set.stats.apply(raw_pis[i]), alphas[i]});
    alpha_sum += alphas[i];
  }
  set.alpha_bar = alpha_sum / n;
  if (set.alpha_bar < 1e-9) {
    throw ModelError("TrainingSet: degenerate set (mean alpha below 1e-9 m)");
  }
  return set;
}

void ProbeModel::build_index() {
  std::vector<std::array<double, kPredictorDim>> pts;
  pts.reserve(theta.samples.size());
  for (const auto& s : theta.samples) {
    std::array<double, kPredictorDim> p;
    for (int i = 0; i < kPredictorDim; ++i) p[i] = s.pi[i];
    pts.push_back(p);
  }
  index_ = KdTree<kPredictorDim>(std::move(pts));
}

std::vector<double> ProbeModel::knn_query(
    const PredictorVector& standardized_pi) const {
  if (index_.size() != theta.samples.size()) {
    throw ModelError("ProbeModel: index not built");
  }
  std::array<double, kPredictorDim> q;
  for (int i = 0; i < kPredictorDim; ++i) q[i] = standardized_pi[i];
  const auto idx = index_.knn(q, static_cast<size_t>(k));
  std::vector<double> alphas;
  alphas.reserve(idx.size());
  for (size_t i : idx) alphas.push_back(theta.samples[i].alpha);
  return alphas;
}

double ProbeModel::weight_standardized(
    const PredictorVector& standardized_pi) const {
  const std::vector<double> alphas = knn_query(standardized_pi);
  const double mean =
      std::accumulate(alphas.begin(), alphas.end(), 0.0) /
      static_cast<double>(alphas.size());
  const double beta = std::pow(mean / theta.alpha_bar, gamma);
  return std::clamp(beta, kBetaMin, kBetaMax);
}

double ProbeModel::weight(const PredictorVector& raw_pi) const {
  return weight_standardized(theta.stats.apply(raw_pi));
}

int select_k(const TrainingSet& theta, const std::vector<int>& candidates) {
  if (candidates.empty()) throw ModelError("select_k: no candidates");
  const size_t n = theta.samples.size();
  const int max_k = *std::max_element(candidates.begin(), candidates.end());
  if (n < static_cast<size_t>(max_k)) {
    throw ModelError("select_k: training set smaller than largest candidate");
  }

  constexpr int kFolds = 5;
  double best_mse = std::numeric_limits<double>::infinity();
  int best_k = candidates.front();
  std::vector<int> sorted(candidates);
  std::sort(sorted.begin(), sorted.end());

  // Pre-build per-fold trees once; reuse across candidates.
  struct Fold {
    KdTree<kPredictorDim> tree;
    std::vector<double> alphas;    // training alphas, tree order
    std::vector<size_t> held_out;  // sample indices
  };
  std::vector<Fold> folds(kFolds);
  for (int f = 0; f < kFolds; ++f) {
    std::vector<std::array<double, kPredictorDim>> pts;
    for (size_t i = 0; i < n; ++i) {
      std::array<double, kPredictorDim> p;
      for (int d = 0; d < kPredictorDim; ++d) p[d] = theta.samples[i].pi[d];
      if (i % kFolds == static_cast<size_t>(f)) {
        folds[f].held_out.push_back(i);
      } else {
        pts.push_back(p);
        folds[f].alphas.push_back(theta.samples[i].alpha);
      }
    }
    folds[f].tree = KdTree<kPredictorDim>(std::move(pts));
  }

  for (int cand : sorted) {
    double sse = 0.0;
    size_t count = 0;
    for (const Fold& fold : folds) {
      if (fold.alphas.empty()) continue;
      for (size_t i : fold.held_out) {
        std::array<double, kPredictorDim> q;
        for (int d = 0; d < kPredictorDim; ++d) q[d] = theta.samples[i].pi[d];
        const auto nb = fold.tree.knn(q, static_cast<size_t>(cand));
        double mean = 0.0;
        for (size_t j : nb) mean += fold.alphas[j];
        mean /= static_cast<double>(nb.size());
        const double err = mean - theta.samples[i].alpha;
        sse += err * err;
        ++count;
      }
    }
    const double mse = sse / static_cast<double>(count);
    if (mse < best_mse - 1e-15) {
      best_mse = mse;
      best_k = cand;
    }
  }
  return best_k;
}

double select_gamma(const std::vector<double>& candidates,
                    const std::function<double(double)>& armse_of_gamma) {
  if (candidates.empty()) throw ModelError("select_gamma: no candidates");
  std::vector<double> sorted(candidates);
  std::sort(sorted.begin(), sorted.end());
  double best = sorted.front();
  double best_armse = std::numeric_limits<double>::infinity();
  for (double g : sorted) {
    const double armse = armse_of_gamma(g);
    if (armse < best_armse - 1e-15) {
      best_armse = armse;
      best = g;
    }
  }
  return best;
}

namespace {

constexpr char kMagic[4] = {'P', 'R', 'B', '1'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ModelError("corrupt model file (truncated): " + path);
  return v;
}

} // namespace

void save_model(const ProbeModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write model file: " + path);
  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<uint32_t>(model.k));
  put(out, model.gamma);
  put(out, model.theta.alpha_bar);
  for (int i = 0; i < kPredictorDim; ++i) put(out, model.theta.stats.mean[i]);
  for (int i = 0; i < kPredictorDim; ++i) put(out, model.theta.stats.stddev[i]);
  put(out, model.predictor_config_hash);
  put(out, static_cast<uint64_t>(model.camera_id.size()));
  out.write(model.camera_id.data(),
            static_cast<std::streamsize>(model.camera_id.size()));
  put(out, static_cast<uint64_t>(model.theta.samples.size()));
  for (const auto& s : model.theta.samples) {
    for (int i = 0; i < kPredictorDim; ++i) put(out, s.pi[i]);
    put(out, s.alpha);
  }
  if (!out) throw ModelError("short write on model file: " + path);
}

ProbeModel load_model(const std::string& path, uint64_t expected_config_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ModelError("bad magic bytes in model file: " + path);
  }
  const uint32_t version = get<uint32_t>(in, path);
  if (version != kVersion) {
    throw ModelError("unsupported model file version " +
                     std::to_string(version) + ": " + path);
  }
  ProbeModel model;
  model.k = static_cast<int>(get<uint32_t>(in, path));
  model.gamma = get<double>(in, path);
  model.theta.alpha_bar = get<double>(in, path);
  for (int i = 0; i < kPredictorDim; ++i) {
    model.theta.stats.mean[i] = get<double>(in, path);
  }
  for (int i = 0; i < kPredictorDim; ++i) {
    model.theta.stats.stddev[i] = get<double>(in, path);
  }
  model.predictor_config_hash = get<uint64_t>(in, path);
  const uint64_t id_len = get<uint64_t>(in, path);
  if (id_len > 1 << 20) throw ModelError("corrupt model file: " + path);
  model.camera_id.resize(id_len);
  in.read(model.camera_id.data(), static_cast<std::streamsize>(id_len));
  if (!in) throw ModelError("corrupt model file (truncated): " + path);
  const uint64_t count = get<uint64_t>(in, path);
  model.theta.samples.resize(count);
  for (uint64_t i = 0; i < count; ++i) {
    for (int d = 0; d < kPredictorDim; ++d) {
      model.theta.samples[i].pi[d] = get<double>(in, path);
    }
    model.theta.samples[i].alpha = get<double>(in, path);
  }
  if (model.k < 1 || model.gamma < 0.0 || model.theta.samples.empty()) {
    throw ModelError("corrupt model file (invalid fields): " + path);
  }
  if (expected_config_hash != 0 &&
      expected_config_hash != model.predictor_config_hash) {
    model.config_hash_mismatch = true;
  }
  model.build_index();
  return model;
}

} // namespace probe
