#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <random>

#include "lrd/errors.hpp"
#include "lrd/noise_estimation.hpp"
#include "lrd/random.hpp"
#include "test_helpers.hpp"

using namespace lrd;

namespace {

// Brute-force gradient covariance: accumulate explicit 2x2 outer products.
Eigen::Matrix2d covariance_oracle(const std::vector<double>& p, int d) {
  Eigen::Matrix2d sum = Eigen::Matrix2d::Zero();
  for (int r = 0; r < d - 1; ++r) {
    for (int c = 0; c < d - 1; ++c) {
      const Eigen::Vector2d g(p[static_cast<std::size_t>(r * d + c + 1)] - p[static_cast<std::size_t>(r * d + c)],
                              p[static_cast<std::size_t>((r + 1) * d + c)] - p[static_cast<std::size_t>(r * d + c)]);
      sum += g * g.transpose();
    }
  }
  return sum;
}

}  // namespace

TEST_CASE("filtered_noise_std") {
  const Image a = lrd::testing::random_image(20, 10, 1);
  CHECK(filtered_noise_std(a, a) == 0.0);
  Image shifted = a;
  for (double& v : shifted.pixels()) v -= 3.0;
  CHECK(filtered_noise_std(a, shifted) == doctest::Approx(3.0));
  CHECK_THROWS_AS(filtered_noise_std(a, Image(10, 20)), DimensionMismatch);

  const Image clean = lrd::testing::random_image(512, 512, 2);
  const Image noisy = add_gaussian_noise(clean, 20.0, 3);
  CHECK(std::abs(filtered_noise_std(noisy, clean) - 20.0) < 0.02 * 20.0);
}

TEST_CASE("residual_std and geometric_residual_std") {
  CHECK(residual_std(30, 18, 1) == doctest::Approx(24.0));
  CHECK(residual_std(30, 0, 0.6) == doctest::Approx(18.0));
  CHECK(residual_std(30, 30, 1) == 0.0);
  CHECK(residual_std(30, 45, 1) == 0.0);
  CHECK(geometric_residual_std(50, 30, 1) == doctest::Approx(40.0));
  CHECK(geometric_residual_std(50, 0, 2) == doctest::Approx(100.0));
  CHECK(geometric_residual_std(50, 60, 1) == 0.0);
}

TEST_CASE("residual estimates are monotone and linear in gamma") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> val(0.0, 100.0);
  for (int i = 0; i < 200; ++i) {
    const double n = val(rng), a = val(rng), b = val(rng), g = val(rng) / 50.0 + 0.01;
    const double lo = std::min(a, b), hi = std::max(a, b);
    CHECK(residual_std(n, hi, g) <= residual_std(n, lo, g));
    CHECK(geometric_residual_std(n, hi, g) <= geometric_residual_std(n, lo, g));
    CHECK(residual_std(n, a, 2.0 * g) == doctest::Approx(2.0 * residual_std(n, a, g)));
    CHECK(geometric_residual_std(n, a, 3.0 * g) ==
          doctest::Approx(3.0 * geometric_residual_std(n, a, g)));
  }
}

TEST_CASE("combined_estimate") {
  CHECK(combined_estimate(10, 8, 1.0) == 10.0);
  CHECK(combined_estimate(10, 8, 0.0) == 8.0);
  CHECK(combined_estimate(10, 8, 0.8) == doctest::Approx(9.6));
  CHECK_THROWS_AS(combined_estimate(1, 2, 1.5), InvalidArgument);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> val(0.0, 60.0), unit(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double a = val(rng), b = val(rng), alpha = unit(rng);
    const double out = combined_estimate(a, b, alpha);
    CHECK(out >= std::min(a, b) - 1e-12);
    CHECK(out <= std::max(a, b) + 1e-12);
  }
}

TEST_CASE("alpha_for") {
  CHECK(alpha_for(10) == 0.9);
  CHECK(alpha_for(29.99) == 0.9);
  CHECK(alpha_for(30) == 0.8);
  CHECK(alpha_for(100) == 0.8);
  CHECK_THROWS_AS(alpha_for(0), InvalidArgument);
}

TEST_CASE("gradient_covariance") {
  CHECK(gradient_covariance(std::vector<double>(25, 7.0), 5).xx == 0.0);
  const auto flat = gradient_covariance(std::vector<double>(25, 7.0), 5);
  CHECK(flat.xy == 0.0);
  CHECK(flat.yy == 0.0);

  std::vector<double> ramp(25);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) ramp[static_cast<std::size_t>(r * 5 + c)] = c;
  const auto cov = gradient_covariance(ramp, 5);
  CHECK(cov.xx == 16.0);
  CHECK(cov.xy == 0.0);
  CHECK(cov.yy == 0.0);
  CHECK(cov.max_eigenvalue() == doctest::Approx(16.0));
  CHECK(cov.min_eigenvalue() == doctest::Approx(0.0));

  CHECK_THROWS_AS(gradient_covariance(std::vector<double>(4), 1), InvalidArgument);
  CHECK_THROWS_AS(gradient_covariance(std::vector<double>(5), 2), LengthMismatch);
}

TEST_CASE("gradient_covariance matches brute force and is PSD") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> val(0.0, 255.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 8;
    std::vector<double> p(static_cast<std::size_t>(d * d));
    for (double& v : p) v = val(rng);
    const auto cov = gradient_covariance(p, d);
    const Eigen::Matrix2d oracle = covariance_oracle(p, d);
    CHECK(cov.xx == doctest::Approx(oracle(0, 0)).epsilon(1e-12));
    CHECK(cov.xy == doctest::Approx(oracle(0, 1)).epsilon(1e-12));
    CHECK(cov.yy == doctest::Approx(oracle(1, 1)).epsilon(1e-12));
    CHECK(cov.min_eigenvalue() >= -1e-10 * std::max(1.0, cov.max_eigenvalue()));
    CHECK(cov.min_eigenvalue() <= cov.max_eigenvalue());
  }
}

TEST_CASE("unit_texture_threshold is deterministic and scales with patch size") {
  const double t7 = unit_texture_threshold(7, 1);
  CHECK(t7 == unit_texture_threshold(7, 1));
  CHECK(t7 > 0.0);
  // Each forward difference of unit white noise has variance 2, so the
  // dominant eigenvalue is at least the mean trace share 2 (d-1)^2.
  CHECK(t7 > 2.0 * 36);
  CHECK(unit_texture_threshold(9, 1) > t7);
}

TEST_CASE("pca_noise_sigma on white noise") {
  GaussianSource gauss(4);
  std::vector<double> data(49 * 20000);
  for (double& v : data) v = 12.0 * gauss();
  CHECK(std::abs(pca_noise_sigma(data, 49) - 12.0) < 0.03 * 12.0);
  CHECK_THROWS_AS(pca_noise_sigma(std::vector<double>(10), 3), LengthMismatch);
}

TEST_CASE("weak_texture_sigma on synthetic images") {
  const PatchSpec spec{7, 4, 90, 31};
  SUBCASE("pure noise") {
    const Image noise = add_gaussian_noise(Image(256, 256, 0.0), 30.0, 17);
    const double est = weak_texture_sigma(noise, spec, 0);
    CHECK(std::abs(est - 30.0) < 0.05 * 30.0);
    // Agrees with the plain RMS of the noise.
    const double rms = filtered_noise_std(noise, Image(256, 256, 0.0));
    CHECK(std::abs(est - rms) < 0.1 * rms);
  }
  SUBCASE("constant plus noise") {
    const Image noisy = add_gaussian_noise(Image(256, 256, 120.0), 10.0, 18);
    CHECK(std::abs(weak_texture_sigma(noisy, spec, 0) - 10.0) < 0.05 * 10.0);
  }
  SUBCASE("noise-free constant image") {
    const auto est = estimate_weak_texture(Image(256, 256, 90.0), 7, 0);
    CHECK(est.sigma <= 1e-6);
    CHECK(est.all_patch_sigma <= 1e-6);
    CHECK_FALSE(est.degenerate);
  }
  SUBCASE("deterministic") {
    const Image noisy = add_gaussian_noise(lrd::testing::random_image(96, 96, 3), 15.0, 4);
    CHECK(weak_texture_sigma(noisy, spec, 5) == weak_texture_sigma(noisy, spec, 5));
  }
  SUBCASE("too few patches") {
    CHECK_THROWS_AS(weak_texture_sigma(Image(16, 16), spec, 0), ImageTooSmall);
  }
}

TEST_CASE("weak texture selection ignores strong structure") {
  // Half flat, half a steep ramp: the ramp patches must be rejected.
  Image img(128, 128);
  for (int r = 0; r < 128; ++r)
    for (int c = 0; c < 128; ++c) img(r, c) = c < 64 ? 100.0 : 100.0 + 6.0 * (c - 64) + 3.0 * r;
  const Image noisy = add_gaussian_noise(img, 5.0, 8);
  const auto est = estimate_weak_texture(noisy, 7, 0);
  CHECK(est.selected_patches < est.total_patches);
  CHECK(std::abs(est.sigma - 5.0) < 0.1 * 5.0);
}
