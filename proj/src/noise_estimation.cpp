#include "lrd/noise_estimation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lrd/errors.hpp"
#include "lrd/random.hpp"

namespace lrd {

double filtered_noise_std(const Image& y, const Image& y_k) {
  if (!y.same_shape(y_k)) throw DimensionMismatch("filtered_noise_std: images differ in size");
  double sum = 0.0;
  auto a = y.pixels();
  auto b = y_k.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum / static_cast<double>(a.size()));
}

double residual_std(double sigma_n, double sigma_flt, double gamma) {
  return gamma * std::sqrt(std::max(sigma_n * sigma_n - sigma_flt * sigma_flt, 0.0));
}

double geometric_residual_std(double sigma_n, double sigma_geom, double gamma) {
  return gamma * std::sqrt(std::max(sigma_n * sigma_n - sigma_geom * sigma_geom, 0.0));
}

double combined_estimate(double sigma_res, double sigma_res_geom, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  return alpha * sigma_res + (1.0 - alpha) * sigma_res_geom;
}

double alpha_for(double sigma_n) {
  if (!(sigma_n > 0.0)) throw InvalidArgument("alpha_for: sigma_n must be positive");
  return sigma_n < 30.0 ? 0.9 : 0.8;
}

double GradientCovariance::max_eigenvalue() const {
  const double mean = 0.5 * (xx + yy);
  const double half_gap = std::hypot(0.5 * (xx - yy), xy);
  return mean + half_gap;
}

double GradientCovariance::min_eigenvalue() const {
  const double mean = 0.5 * (xx + yy);
  const double half_gap = std::hypot(0.5 * (xx - yy), xy);
  return mean - half_gap;
}

GradientCovariance gradient_covariance(std::span<const double> patch, int size) {
  if (size < 2) throw InvalidArgument("gradient_covariance: patch size must be at least 2");
  if (patch.size() != static_cast<std::size_t>(size * size)) {
    throw LengthMismatch("gradient_covariance: expected " + std::to_string(size * size) +
                         " values");
  }
  GradientCovariance cov;
  for (int r = 0; r + 1 < size; ++r) {
    for (int c = 0; c + 1 < size; ++c) {
      const double here = patch[static_cast<std::size_t>(r * size + c)];
      const double gx = patch[static_cast<std::size_t>(r * size + c + 1)] - here;
      const double gy = patch[static_cast<std::size_t>((r + 1) * size + c)] - here;
      cov.xx += gx * gx;
      cov.xy += gx * gy;
      cov.yy += gy * gy;
    }
  }
  return cov;
}

double unit_texture_threshold(int size, std::uint64_t seed) {
  constexpr int kSamples = 2000;
  GaussianSource gauss(seed);
  std::vector<double> patch(static_cast<std::size_t>(size * size));
  std::vector<double> response(kSamples);
  for (auto& value : response) {
    for (double& p : patch) p = gauss();
    value = gradient_covariance(patch, size).max_eigenvalue();
  }
  // Nearest-rank 99th percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * kSamples)) - 1;
  std::nth_element(response.begin(), response.begin() + static_cast<std::ptrdiff_t>(rank),
                   response.end());
  return response[rank];
}

namespace {

// Smallest eigenvalue of the sample covariance of the first n columns of a
// fixed matrix, maintained incrementally as n moves.
class PrefixCovariance {
 public:
  explicit PrefixCovariance(const Eigen::MatrixXd& columns)
      : columns_(columns),
        sum_(Eigen::VectorXd::Zero(columns.rows())),
        outer_(Eigen::MatrixXd::Zero(columns.rows(), columns.rows())) {}

  double noise_sigma(Eigen::Index n) {
    move_to(n);
    const auto dim = static_cast<double>(columns_.rows());
    const auto count = static_cast<double>(n);
    if (n < 2) return 0.0;
    const Eigen::VectorXd mean = sum_ / count;
    Eigen::MatrixXd cov = outer_.selfadjointView<Eigen::Lower>();
    cov -= count * mean * mean.transpose();
    cov /= count - 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    const double smallest = std::max(eig.eigenvalues()(0), 0.0);
    // The smallest sample eigenvalue of white noise concentrates near
    // sigma^2 (1 - sqrt(dim / count))^2.
    const double ratio = std::sqrt(dim / count);
    const double shrink = ratio < 0.5 ? (1.0 - ratio) * (1.0 - ratio) : 1.0;
    return std::sqrt(smallest / shrink);
  }

 private:
  void move_to(Eigen::Index n) {
    if (n > current_) {
      const auto block = columns_.middleCols(current_, n - current_);
      sum_ += block.rowwise().sum();
      outer_.selfadjointView<Eigen::Lower>().rankUpdate(block, 1.0);
    } else if (n < current_) {
      const auto block = columns_.middleCols(n, current_ - n);
      sum_ -= block.rowwise().sum();
      outer_.selfadjointView<Eigen::Lower>().rankUpdate(block, -1.0);
    }
    current_ = n;
  }

  const Eigen::MatrixXd& columns_;
  Eigen::VectorXd sum_;
  Eigen::MatrixXd outer_;
  Eigen::Index current_ = 0;
};

}  // namespace

double pca_noise_sigma(std::span<const double> patches, int dimension) {
  if (dimension < 1 || patches.size() % static_cast<std::size_t>(dimension) != 0) {
    throw LengthMismatch("pca_noise_sigma: data is not a whole number of patches");
  }
  const auto n = static_cast<Eigen::Index>(patches.size() / static_cast<std::size_t>(dimension));
  const Eigen::MatrixXd columns = Eigen::Map<const Eigen::MatrixXd>(patches.data(), dimension, n);
  PrefixCovariance cov(columns);
  return cov.noise_sigma(n);
}

WeakTextureEstimate estimate_weak_texture(const Image& img, int patch_size, std::uint64_t seed) {
  constexpr int kStep = 2;
  constexpr int kMinPatches = 50;
  constexpr int kMinSelected = 10;
  constexpr int kMaxIterations = 10;
  constexpr double kTolerance = 1e-3;

  if (patch_size < 2) throw InvalidArgument("weak texture estimation needs patch size >= 2");
  if (img.width() < patch_size || img.height() < patch_size) {
    throw ImageTooSmall("image is smaller than one patch");
  }
  const auto rows = grid_offsets(img.height() - patch_size, kStep);
  const auto cols = grid_offsets(img.width() - patch_size, kStep);
  const auto total = static_cast<Eigen::Index>(rows.size() * cols.size());
  if (total < kMinPatches) {
    throw ImageTooSmall("weak texture estimation needs at least " + std::to_string(kMinPatches) +
                        " patches, image gives " + std::to_string(total));
  }

  const int dim = patch_size * patch_size;
  Eigen::MatrixXd raw(dim, total);
  std::vector<double> texture(static_cast<std::size_t>(total));
  Eigen::Index j = 0;
  for (int r : rows) {
    for (int c : cols) {
      std::span<double> col(raw.col(j).data(), static_cast<std::size_t>(dim));
      extract_patch(img, {r, c}, patch_size, col);
      texture[static_cast<std::size_t>(j)] = gradient_covariance(col, patch_size).max_eigenvalue();
      ++j;
    }
  }

  // Sorted by texture strength, every threshold selects a prefix.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return texture[static_cast<std::size_t>(a)] < texture[static_cast<std::size_t>(b)];
  });
  Eigen::MatrixXd sorted(dim, total);
  std::vector<double> sorted_texture(static_cast<std::size_t>(total));
  for (Eigen::Index i = 0; i < total; ++i) {
    sorted.col(i) = raw.col(order[static_cast<std::size_t>(i)]);
    sorted_texture[static_cast<std::size_t>(i)] = texture[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  }
  raw.resize(0, 0);

  PrefixCovariance cov(sorted);
  WeakTextureEstimate out;
  out.total_patches = static_cast<int>(total);
  out.all_patch_sigma = cov.noise_sigma(total);
  out.selected_patches = out.total_patches;

  const double unit = unit_texture_threshold(patch_size, seed);
  double sigma = out.all_patch_sigma;
  for (int t = 1; t <= kMaxIterations; ++t) {
    const double threshold = unit * sigma * sigma;
    const auto selected = static_cast<Eigen::Index>(
        std::upper_bound(sorted_texture.begin(), sorted_texture.end(), threshold) -
        sorted_texture.begin());
    if (selected < kMinSelected) {
      out.degenerate = true;
      sigma = out.all_patch_sigma;
      out.selected_patches = out.total_patches;
      break;
    }
    const double next = cov.noise_sigma(selected);
    out.iterations = t;
    out.selected_patches = static_cast<int>(selected);
    const bool converged = std::abs(next - sigma) < kTolerance;
    sigma = next;
    if (converged) break;
  }
  out.sigma = sigma;
  return out;
}

double weak_texture_sigma(const Image& img, const PatchSpec& spec, std::uint64_t seed) {
  return estimate_weak_texture(img, spec.size, seed).sigma;
}

}  // namespace lrd
