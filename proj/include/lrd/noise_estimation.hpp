#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lrd/image.hpp"
#include "lrd/patch_grid.hpp"

namespace lrd {

// Residual-noise bookkeeping for one outer iteration.
struct NoiseState {
  int iteration = 1;
  double sigma_n = 0.0;         // noise level of the input
  double sigma_flt = 0.0;       // RMS of what has been filtered out so far
  double sigma_res = 0.0;       // residual estimate from sigma_flt
  double sigma_geom = 0.0;      // weak-texture estimate on the current iterate
  double sigma_res_geom = 0.0;  // residual estimate from sigma_geom
  double sigma_hat = 0.0;       // value used for shrinkage this iteration
  double gamma = 0.0;
  double alpha = 1.0;
};

// RMS of y - y_k over all pixels.
double filtered_noise_std(const Image& y, const Image& y_k);

// gamma * sqrt(max(sigma_n^2 - sigma_flt^2, 0))
double residual_std(double sigma_n, double sigma_flt, double gamma);

// gamma * sqrt(max(sigma_n^2 - sigma_geom^2, 0))
double geometric_residual_std(double sigma_n, double sigma_geom, double gamma);

// alpha * sigma_res + (1 - alpha) * sigma_res_geom
double combined_estimate(double sigma_res, double sigma_res_geom, double alpha);

// Mixing weight: 0.9 below sigma_n = 30, 0.8 from 30 up.
double alpha_for(double sigma_n);

// Sum of gradient outer products over one patch, [[xx, xy], [xy, yy]].
struct GradientCovariance {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double max_eigenvalue() const;
  double min_eigenvalue() const;
};

// Forward differences g_x = p(r, c+1) - p(r, c), g_y = p(r+1, c) - p(r, c)
// sampled on the (d-1) x (d-1) grid where both exist. `patch` is d x d,
// row-major.
GradientCovariance gradient_covariance(std::span<const double> patch, int size);

// 99th percentile of the dominant gradient-covariance eigenvalue of
// size x size patches of unit-variance white noise, from 2000 Monte Carlo
// samples. The percentile at noise level sigma is this value times sigma^2.
double unit_texture_threshold(int size, std::uint64_t seed);

// Noise std from the smallest eigenvalue of the sample covariance of the
// given flattened patches (columns). Corrects for the downward bias of the
// smallest sample eigenvalue when the sample is not much larger than the
// dimension.
double pca_noise_sigma(std::span<const double> patches, int dimension);

struct WeakTextureEstimate {
  double sigma = 0.0;            // final weak-texture estimate
  double all_patch_sigma = 0.0;  // PCA estimate over every patch
  int total_patches = 0;
  int selected_patches = 0;
  int iterations = 0;
  bool degenerate = false;  // too few weak-texture patches; fell back to all_patch_sigma
};

// Iterative weak-texture noise estimation: start from PCA over all patches,
// then repeatedly keep the patches whose gradient response is consistent with
// noise at the current level and re-run PCA on them. Patches are size x size
// at step 2. Throws ImageTooSmall if fewer than 50 patches fit.
WeakTextureEstimate estimate_weak_texture(const Image& img, int patch_size, std::uint64_t seed);

double weak_texture_sigma(const Image& img, const PatchSpec& spec, std::uint64_t seed);

}  // namespace lrd
