#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "probe/predictors.hpp"
#include "probe/random.hpp"

#include <algorithm>
#include <cmath>

using namespace probe;

namespace {

Image textured_image(int w, int h, uint64_t seed) {
  Image img(w, h);
  auto rng = seed_stream(seed, "texture");
  std::uniform_int_distribution<int> level(0, 255);
  for (auto& px : img.data) px = static_cast<uint8_t>(level(rng));
  return img;
}

std::vector<uint8_t> random_patch(int side, uint64_t seed) {
  auto rng = seed_stream(seed, "patch");
  std::uniform_int_distribution<int> level(0, 255);
  std::vector<uint8_t> patch(static_cast<size_t>(side) * side);
  for (auto& px : patch) px = static_cast<uint8_t>(level(rng));
  return patch;
}

} // namespace

TEST_CASE("imu_magnitudes basics") {
  CHECK_THROWS_AS(imu_magnitudes({}), DomainError);

  std::vector<ImuSample> still(5, {Vec3::Zero(), Vec3::Zero(), 0.01});
  auto [w0, a0] = imu_magnitudes(still);
  CHECK(w0 == 0.0);
  CHECK(a0 == 0.0);

  std::vector<ImuSample> spin(7, {Vec3(0, 0, 2), Vec3(1, 0, 0), 0.01});
  auto [w, a] = imu_magnitudes(spin);
  CHECK(w == doctest::Approx(2.0));
  CHECK(a == doctest::Approx(1.0));
}

TEST_CASE("imu_magnitudes is the norm of the mean, not the mean of norms") {
  std::vector<ImuSample> mixed{{Vec3(1, 0, 0), Vec3(0, 2, 0), 0.01},
                               {Vec3(-1, 0, 0), Vec3(0, -2, 0), 0.01},
                               {Vec3(0, 3, 0), Vec3(0, 0, 6), 0.01}};
  // scripted oracle: mean omega = (0,1,0), mean a = (0,0,2)
  auto [w, a] = imu_magnitudes(mixed);
  CHECK(w == doctest::Approx(1.0));
  CHECK(a == doctest::Approx(2.0));
}

TEST_CASE("patch_entropy worked cases") {
  std::vector<uint8_t> constant(32 * 32, 37);
  CHECK(patch_entropy(constant) == doctest::Approx(0.0));

  std::vector<uint8_t> halves(32 * 32, 0);
  std::fill(halves.begin() + halves.size() / 2, halves.end(), uint8_t{255});
  CHECK(patch_entropy(halves, 256) == doctest::Approx(1.0));
}

TEST_CASE("uniform random patch approaches 8 bits at 256 bins") {
  const auto patch = random_patch(256, 99);
  CHECK(patch_entropy(patch, 256) == doctest::Approx(8.0).epsilon(0.01));
}

TEST_CASE("entropy is permutation invariant") {
  auto patch = random_patch(32, 7);
  const double before = patch_entropy(patch);
  auto rng = seed_stream(8, "perm");
  std::shuffle(patch.begin(), patch.end(), rng);
  CHECK(patch_entropy(patch) == before);
}

TEST_CASE("entropy is bounded by log2(bins)") {
  const auto patch = random_patch(64, 12);
  for (int bins : {2, 8, 32, 256}) {
    const double s = patch_entropy(patch, bins);
    CHECK(s >= 0.0);
    CHECK(s <= std::log2(static_cast<double>(bins)) + 1e-12);
  }
}

TEST_CASE("blur metric: monotone in gaussian sigma on textured images") {
  const Image img = textured_image(160, 120, 4);
  double prev = -1.0;
  for (double sigma : {0.0, 1.0, 2.0, 4.0}) {
    const double m = blur_metric(gaussian_blur(img, sigma));
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
    CHECK(m > prev);
    prev = m;
  }
}

TEST_CASE("blur metric bounds over random images") {
  for (uint64_t s = 0; s < 100; ++s) {
    const double m = blur_metric(textured_image(40, 30, s));
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
  }
}

TEST_CASE("blur metric: constant image convention and checker separation") {
  Image flat(32, 32, 120);
  CHECK(blur_metric(flat) == doctest::Approx(1.0));

  Image checker(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      checker.at(x, y) = ((x / 4 + y / 4) % 2) ? 255 : 0;
    }
  }
  const double sharp = blur_metric(checker);
  const double blurred = blur_metric(gaussian_blur(checker, 4.0));
  CHECK(blurred - sharp > 0.1);
}

TEST_CASE("flow variance score cases") {
  PredictorConfig cfg;
  FlowContext uniform;
  for (int i = 0; i < 50; ++i) {
    uniform.positions.emplace_back(5.0 * i, 3.0 * (i % 7));
    uniform.flows.emplace_back(2.0, -1.0);
  }
  const FlowScore s = flow_variance_score(uniform, 60.0, 10.0, cfg);
  CHECK(!s.insufficient_context);
  CHECK(s.score == doctest::Approx(0.0));

  FlowContext sparse;
  sparse.positions.emplace_back(0.0, 0.0);
  sparse.flows.emplace_back(1.0, 0.0);
  const FlowScore bad = flow_variance_score(sparse, 0.0, 0.0, cfg);
  CHECK(bad.insufficient_context);
  CHECK(bad.score == 0.0);
}

TEST_CASE("flow variance score direct ratio arithmetic") {
  // small region variance = 10x large region variance, both >> floor:
  // construct flows whose small-region variance dominates
  PredictorConfig cfg;
  cfg.flow_radius_small = 10.0;
  cfg.flow_radius_large = 100.0;
  FlowContext ctx;
  // inside both regions: alternating +-a around zero mean
  // variance of each component = a^2
  const double a_small = 4.0;
  for (int i = 0; i < 40; ++i) {
    ctx.positions.emplace_back(0.5 * (i % 8), 0.5 * (i / 8));
    const double sign = (i % 2) ? 1.0 : -1.0;
    ctx.flows.emplace_back(sign * a_small, sign * a_small);
  }
  // outside small region, inside large: constant flow, pulls the mean
  // variance of the large region down to ~a^2 * n_small/n_total
  for (int i = 0; i < 360; ++i) {
    ctx.positions.emplace_back(50.0 + 0.1 * (i % 20), 50.0 + 0.1 * (i / 20));
    ctx.flows.emplace_back(0.0, 0.0);
  }
  const FlowScore s = flow_variance_score(ctx, 0.0, 0.0, cfg);
  // oracle: small variance a^2 = 16, large variance = 16 * 40/400 = 1.6,
  // ratio 10 -> ln 10
  CHECK(s.score == doctest::Approx(std::log(10.0)).epsilon(1e-3));
}

TEST_CASE("flow variance score is shift invariant") {
  PredictorConfig cfg;
  auto rng = seed_stream(17, "flows");
  std::normal_distribution<double> gauss(0.0, 2.0);
  FlowContext ctx;
  for (int i = 0; i < 80; ++i) {
    ctx.positions.emplace_back(3.0 * (i % 10), 3.0 * (i / 10));
    ctx.flows.emplace_back(gauss(rng), gauss(rng));
  }
  const double base = flow_variance_score(ctx, 10.0, 10.0, cfg).score;
  for (auto& f : ctx.flows) f += Eigen::Vector2d(13.0, -7.0);
  CHECK(flow_variance_score(ctx, 10.0, 10.0, cfg).score ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("frequency coefficients: constant and single sinusoid") {
  std::vector<uint8_t> constant(32 * 32, 90);
  auto [lo0, hi0] = frequency_coefficients(constant, 32);
  CHECK(lo0 == doctest::Approx(0.0));
  CHECK(hi0 == doctest::Approx(0.0));

  std::vector<uint8_t> sinus(32 * 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      sinus[static_cast<size_t>(y) * 32 + x] = static_cast<uint8_t>(
          128 + 100 * std::sin(2.0 * M_PI * x / 32.0));
    }
  }
  auto [lo, hi] = frequency_coefficients(sinus, 32);
  CHECK(lo > 0.0);
  CHECK(hi < 0.05 * lo);
}

TEST_CASE("white noise has a flat spectrum") {
  const auto patch = random_patch(64, 41);
  auto [lo, hi] = frequency_coefficients(patch, 64);
  CHECK(std::abs(hi - lo) / lo < 0.2);
}

TEST_CASE("frequency coefficients ignore constant offsets") {
  auto patch = random_patch(32, 55);
  for (auto& px : patch) px = static_cast<uint8_t>(px / 2); // room for offset
  auto [lo1, hi1] = frequency_coefficients(patch, 32);
  for (auto& px : patch) px = static_cast<uint8_t>(px + 100);
  auto [lo2, hi2] = frequency_coefficients(patch, 32);
  CHECK(lo1 == doctest::Approx(lo2).epsilon(1e-12));
  CHECK(hi1 == doctest::Approx(hi2).epsilon(1e-12));
}

TEST_CASE("frequency coefficients reject non power-of-two sides") {
  std::vector<uint8_t> patch(31 * 31, 0);
  CHECK_THROWS_AS(frequency_coefficients(patch, 31), DomainError);
}

TEST_CASE("build_predictor_vector: static camera, constant image") {
  PredictorConfig cfg;
  Image flat(128, 128, 80);
  std::vector<ImuSample> still(10, {Vec3::Zero(), Vec3::Zero(), 0.01});
  FlowContext flow;
  for (int i = 0; i < 30; ++i) {
    flow.positions.emplace_back(4.0 * i, 64.0);
    flow.flows.emplace_back(0.0, 0.0);
  }
  const PredictorVector pi =
      build_predictor_vector(64.0, 64.0, flat, -1.0, flow, still, cfg);
  PredictorVector expected;
  expected << 0, 0, 0, 1, 0, 0, 0;
  CHECK((pi - expected).norm() < 1e-12);
}

TEST_CASE("build_predictor_vector matches component-wise calls") {
  PredictorConfig cfg;
  const Image img = textured_image(200, 150, 77);
  std::vector<ImuSample> window(8, {Vec3(0.2, 0, 0.1), Vec3(0, 1, 0), 0.01});
  FlowContext flow;
  auto rng = seed_stream(78, "flows");
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    flow.positions.emplace_back(3.0 * (i % 12) + 70.0, 3.0 * (i / 12) + 50.0);
    flow.flows.emplace_back(gauss(rng), gauss(rng));
  }
  const double u = 100.0, v = 75.0;
  const PredictorVector pi =
      build_predictor_vector(u, v, img, -1.0, flow, window, cfg);

  const auto [w_mag, a_mag] = imu_magnitudes(window);
  const auto patch = extract_patch(img, u, v, cfg.patch_size);
  CHECK(pi[0] == w_mag);
  CHECK(pi[1] == a_mag);
  CHECK(pi[2] == patch_entropy(patch, cfg.entropy_bins));
  CHECK(pi[3] == blur_metric(img, cfg.blur_kernel_size));
  CHECK(pi[4] == flow_variance_score(flow, u, v, cfg).score);
  const auto [f_low, f_high] =
      frequency_coefficients(patch, cfg.patch_size, cfg.fft_cutoff);
  CHECK(pi[5] == f_low);
  CHECK(pi[6] == f_high);
}

TEST_CASE("all predictor outputs are finite under fuzzing") {
  PredictorConfig cfg;
  auto rng = seed_stream(123, "fuzz");
  std::uniform_int_distribution<int> level(0, 255);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    std::vector<uint8_t> patch(32 * 32);
    for (auto& px : patch) px = static_cast<uint8_t>(level(rng));
    const double s = patch_entropy(patch);
    auto [lo, hi] = frequency_coefficients(patch, 32);
    CHECK(std::isfinite(s));
    CHECK(std::isfinite(lo));
    CHECK(std::isfinite(hi));
  }
  for (int i = 0; i < 500; ++i) {
    FlowContext ctx;
    const int n = 2 + static_cast<int>(u01(rng) * 20);
    for (int j = 0; j < n; ++j) {
      ctx.positions.emplace_back(u01(rng) * 50.0, u01(rng) * 50.0);
      ctx.flows.emplace_back(u01(rng) * 100.0 - 50.0, u01(rng) * 100.0 - 50.0);
    }
    const FlowScore s = flow_variance_score(ctx, 25.0, 25.0, cfg);
    CHECK(std::isfinite(s.score));
  }
}
