#include "probe/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <functional>
#include <numeric>

namespace probe {

uint64_t PredictorConfig::hash() const {
  uint64_t h = 1469598103934665603ull; // FNV-1a
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<uint64_t>(patch_size));
  mix(static_cast<uint64_t>(entropy_bins));
  mix(static_cast<uint64_t>(blur_kernel_size));
  mix(std::hash<double>{}(flow_radius_small));
  mix(std::hash<double>{}(flow_radius_large));
  mix(std::hash<double>{}(flow_variance_floor));
  mix(std::hash<double>{}(fft_cutoff));
  return h;
}

std::pair<double, double> imu_magnitudes(const std::vector<ImuSample>& window) {
  if (window.empty()) {
    throw DomainError("imu_magnitudes: empty window");
  }
  Vec3 w = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  for (const auto& s : window) {
    w += s.omega;
    a += s.accel;
  }
  const double n = static_cast<double>(window.size());
  return {(w / n).norm(), (a / n).norm()};
}

std::vector<uint8_t> extract_patch(const Image& img, double u, double v,
                                   int size) {
  const int half = size / 2;
  int x0 = static_cast<int>(std::lround(u)) - half;
  int y0 = static_cast<int>(std::lround(v)) - half;
  x0 = std::clamp(x0, 0, std::max(0, img.width - size));
  y0 = std::clamp(y0, 0, std::max(0, img.height - size));
  std::vector<uint8_t> patch(static_cast<size_t>(size) * size, 0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int sx = std::clamp(x0 + x, 0, img.width - 1);
      const int sy = std::clamp(y0 + y, 0, img.height - 1);
      patch[static_cast<size_t>(y) * size + x] = img.at(sx, sy);
    }
  }
  return patch;
}

double patch_entropy(const std::vector<uint8_t>& patch, int bins) {
  if (bins < 2) throw DomainError("patch_entropy: bins < 2");
  if (patch.empty()) return 0.0;
  std::vector<double> counts(static_cast<size_t>(bins), 0.0);
  for (uint8_t px : patch) {
    counts[static_cast<size_t>(px) * bins / 256] += 1.0;
  }
  const double total = static_cast<double>(patch.size());
  double s = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      s -= p * std::log2(p);
    }
  }
  return s;
}

double blur_metric(const Image& img, int kernel_size) {
  if (img.width < 3 || img.height < 3) {
    throw DomainError("blur_metric: image smaller than 3x3");
  }
  // Re-blur comparison: low-pass the image with a box kernel in one
  // direction and measure how much neighbouring-pixel variation survives.
  const int r = kernel_size / 2;
  const int w = img.width;
  const int h = img.height;

  auto box_blur = [&](bool horizontal) {
    std::vector<double> out(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) {
          const int sx = horizontal ? std::clamp(x + i, 0, w - 1) : x;
          const int sy = horizontal ? y : std::clamp(y + i, 0, h - 1);
          acc += img.at(sx, sy);
        }
        out[static_cast<size_t>(y) * w + x] = acc / (2 * r + 1);
      }
    }
    return out;
  };

  auto variation_loss = [&](bool horizontal) {
    const std::vector<double> blurred = box_blur(horizontal);
    double s_orig = 0.0;
    double s_kept = 0.0;
    const int x_lo = horizontal ? 1 : 0;
    const int y_lo = horizontal ? 0 : 1;
    for (int y = y_lo; y < h; ++y) {
      for (int x = x_lo; x < w; ++x) {
        const int px = horizontal ? x - 1 : x;
        const int py = horizontal ? y : y - 1;
        const double d_orig =
            std::abs(static_cast<double>(img.at(x, y)) - img.at(px, py));
        const double d_blur =
            std::abs(blurred[static_cast<size_t>(y) * w + x] -
                     blurred[static_cast<size_t>(py) * w + px]);
        s_orig += d_orig;
        s_kept += std::max(0.0, d_orig - d_blur);
      }
    }
    if (s_orig <= 0.0) return 1.0; // no edges to lose
    return std::clamp((s_orig - s_kept) / s_orig, 0.0, 1.0);
  };

  return std::max(variation_loss(true), variation_loss(false));
}

namespace {

struct RegionVariance {
  double mean_var = 0.0;
  int count = 0;
};

RegionVariance region_flow_variance(const FlowContext& ctx, double u, double v,
                                    double radius) {
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  Eigen::Vector2d sum_sq = Eigen::Vector2d::Zero();
  int n = 0;
  const double r2 = radius * radius;
  for (size_t i = 0; i < ctx.positions.size(); ++i) {
    const double dx = ctx.positions[i].x() - u;
    const double dy = ctx.positions[i].y() - v;
    if (dx * dx + dy * dy > r2) continue;
    sum += ctx.flows[i];
    sum_sq += ctx.flows[i].cwiseProduct(ctx.flows[i]);
    ++n;
  }
  RegionVariance out;
  out.count = n;
  if (n >= 2) {
    const Eigen::Vector2d mean = sum / n;
    const Eigen::Vector2d var =
        (sum_sq / n - mean.cwiseProduct(mean)).cwiseMax(0.0);
    out.mean_var = 0.5 * (var.x() + var.y());
  }
  return out;
}

} // namespace

FlowScore flow_variance_score(const FlowContext& ctx, double u, double v,
                              const PredictorConfig& cfg) {
  const RegionVariance small_r =
      region_flow_variance(ctx, u, v, cfg.flow_radius_small);
  const RegionVariance large_r =
      region_flow_variance(ctx, u, v, cfg.flow_radius_large);
  FlowScore out;
  if (small_r.count < 2 || large_r.count < 2) {
    out.insufficient_context = true;
    return out;
  }
  const double eps = cfg.flow_variance_floor;
  out.score = std::log(small_r.mean_var + eps) - std::log(large_r.mean_var + eps);
  return out;
}

namespace {

// In-place iterative radix-2 FFT along a stride-1 line.
void fft1d(std::complex<double>* x, int n) {
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / len;
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (int k = 0; k < len / 2; ++k) {
        const std::complex<double> a = x[i + k];
        const std::complex<double> b = x[i + k + len / 2] * w;
        x[i + k] = a + b;
        x[i + k + len / 2] = a - b;
        w *= wl;
      }
    }
  }
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

std::pair<double, double> frequency_coefficients(
    const std::vector<uint8_t>& patch, int side, double cutoff_frac) {
  if (!is_pow2(side) || patch.size() != static_cast<size_t>(side) * side) {
    throw DomainError("frequency_coefficients: side must be a power of two");
  }
  const double mean =
      std::accumulate(patch.begin(), patch.end(), 0.0) / patch.size();
  std::vector<std::complex<double>> buf(patch.size());
  for (size_t i = 0; i < patch.size(); ++i) {
    buf[i] = std::complex<double>(patch[i] - mean, 0.0);
  }
  for (int row = 0; row < side; ++row) {
    fft1d(buf.data() + static_cast<size_t>(row) * side, side);
  }
  std::vector<std::complex<double>> col(static_cast<size_t>(side));
  for (int c = 0; c < side; ++c) {
    for (int row = 0; row < side; ++row) {
      col[row] = buf[static_cast<size_t>(row) * side + c];
    }
    fft1d(col.data(), side);
    for (int row = 0; row < side; ++row) {
      buf[static_cast<size_t>(row) * side + c] = col[row];
    }
  }

  // Radial split of the magnitude spectrum; Nyquist is 0.5 cycles/px.
  const double rho_c = cutoff_frac * 0.5;
  double low_sum = 0.0, high_sum = 0.0;
  int low_n = 0, high_n = 0;
  for (int ky = 0; ky < side; ++ky) {
    const double fy =
        static_cast<double>(std::min(ky, side - ky)) / static_cast<double>(side);
    for (int kx = 0; kx < side; ++kx) {
      const double fx = static_cast<double>(std::min(kx, side - kx)) /
                        static_cast<double>(side);
      const double rho = std::hypot(fx, fy);
      const double mag =
          std::abs(buf[static_cast<size_t>(ky) * side + kx]) / patch.size();
      if (rho < rho_c) {
        low_sum += mag;
        ++low_n;
      } else {
        high_sum += mag;
        ++high_n;
      }
    }
  }
  return {low_n > 0 ? low_sum / low_n : 0.0,
          high_n > 0 ? high_sum / high_n : 0.0};
}

PredictorVector build_predictor_vector(double u, double v,
                                       const Image& left_image,
                                       double image_blur,
                                       const FlowContext& flow_ctx,
                                       const std::vector<ImuSample>& imu_window,
                                       const PredictorConfig& cfg) {
  const auto [w_mag, a_mag] = imu_magnitudes(imu_window);
  const std::vector<uint8_t> patch =
      extract_patch(left_image, u, v, cfg.patch_size);
  const double entropy = patch_entropy(patch, cfg.entropy_bins);
  const double blur = image_blur >= 0.0
                          ? image_blur
                          : blur_metric(left_image, cfg.blur_kernel_size);
  const FlowScore flow = flow_variance_score(flow_ctx, u, v, cfg);
  const auto [f_low, f_high] =
      frequency_coefficients(patch, cfg.patch_size, cfg.fft_cutoff);

  PredictorVector pi;
  pi << w_mag, a_mag, entropy, blur, flow.score, f_low, f_high;
  return pi;
}

} // namespace probe
