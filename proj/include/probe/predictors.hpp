#pragma once

#include "probe/geometry.hpp"
#include "probe/image.hpp"

#include <array>
#include <vector>

namespace probe {

constexpr int kPredictorDim = 7;
inline const std::array<const char*, kPredictorDim> kPredictorNames = {
    "w_mag", "a_mag", "entropy", "blur", "flow_var", "f_low", "f_high"};

/// Point in the 7-D prediction space.
using PredictorVector = Eigen::Matrix<double, kPredictorDim, 1>;

struct PredictorConfig {
  int patch_size = 32;       // square, power of two for the FFT
  int entropy_bins = 256;
  int blur_kernel_size = 9;  // re-blur box kernel width
  double flow_radius_small = 25.0;  // px
  double flow_radius_large = 100.0; // px
  double flow_variance_floor = 1e-6; // px^2
  double fft_cutoff = 0.25;  // fraction of Nyquist

  uint64_t hash() const;
};

/// Sparse flow vectors for one frame with their image positions.
struct FlowContext {
  std::vector<Eigen::Vector2d> positions; // px
  std::vector<Eigen::Vector2d> flows;     // px displacement
};

struct FlowScore {
  double score = 0.0;
  bool insufficient_context = false;
};

/// Euclidean norms of the mean angular velocity and mean acceleration
/// over the inter-frame window.
std::pair<double, double> imu_magnitudes(const std::vector<ImuSample>& window);

/// Square patch centered on (u, v), clamped to image bounds.
std::vector<uint8_t> extract_patch(const Image& img, double u, double v,
                                   int size);

/// Shannon entropy (bits) of the normalized intensity histogram.
double patch_entropy(const std::vector<uint8_t>& patch, int bins = 256);

/// No-reference re-blur metric in [0,1]; 1 = maximally blurred.
/// Constant images return 1 by convention.
double blur_metric(const Image& img, int kernel_size = 9);

/// log of small-region to large-region mean flow-component variance ratio,
/// centered on (u, v).
FlowScore flow_variance_score(const FlowContext& ctx, double u, double v,
                              const PredictorConfig& cfg);

/// Mean magnitudes of the zero-mean 2-D spectrum split at the radial
/// cutoff. Patch side must be a power of two.
std::pair<double, double> frequency_coefficients(
    const std::vector<uint8_t>& patch, int side, double cutoff_frac = 0.25);

PredictorVector build_predictor_vector(double u, double v,
                                       const Image& left_image,
                                       double image_blur,
                                       const FlowContext& flow_ctx,
                                       const std::vector<ImuSample>& imu_window,
                                       const PredictorConfig& cfg);

} // namespace probe
