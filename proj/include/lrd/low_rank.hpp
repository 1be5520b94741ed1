#pragma once

#include <Eigen/Core>

namespace lrd {

// Thin SVD, M = u * diag(sigma) * v^T with r = min(rows, cols).
struct SvdFactors {
  Eigen::MatrixXd u;      // rows x r, orthonormal columns
  Eigen::VectorXd sigma;  // r values, non-increasing, non-negative
  Eigen::MatrixXd v;      // cols x r, orthonormal columns
};

// Deterministic thin SVD. Each column of u is flipped (together with the
// matching column of v) so that its first entry of non-negligible magnitude
// is positive. Throws ConvergenceFailure if the solver does not converge.
SvdFactors svd(const Eigen::MatrixXd& matrix);

// Soft thresholding with one threshold: max(sigma_i - theta, 0).
Eigen::VectorXd nnm_shrink(const Eigen::VectorXd& sigma, double theta);

// Signal singular values from noisy ones:
// sqrt(max(sigma_i^2 - patch_count * noise_sigma^2, 0)).
Eigen::VectorXd adjust_singulars(const Eigen::VectorXd& sigma, int patch_count,
                                 double noise_sigma);

// Reweighting w_i = c * sqrt(patch_count) / (adjusted_i + eps). Large
// singular values get small weights.
Eigen::VectorXd wnnm_weights(const Eigen::VectorXd& adjusted, double c, int patch_count,
                             double eps);

// Per-index soft thresholding max(sigma_i - thresholds_i, 0). Throws
// LengthMismatch if the sizes differ.
Eigen::VectorXd wnnm_shrink(const Eigen::VectorXd& sigma, const Eigen::VectorXd& thresholds);

// Partition of shrunk values at tau: values strictly above tau go to `high`,
// the rest to `low`, so high + low reproduces the input exactly.
struct SpectrumSplit {
  Eigen::VectorXd high;
  Eigen::VectorXd low;
};
SpectrumSplit split_spectrum(const Eigen::VectorXd& shrunk, double tau);

// u * diag(values) * v^T. Throws LengthMismatch if values.size() != r.
Eigen::MatrixXd recompose(const SvdFactors& factors, const Eigen::VectorXd& values);

}  // namespace lrd
