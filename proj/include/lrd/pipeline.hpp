#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrd/image.hpp"
#include "lrd/low_rank.hpp"
#include "lrd/noise_estimation.hpp"
#include "lrd/patch_grid.hpp"

namespace lrd {

enum class Mode { kNnm, kWnnm, kGwnnm };

std::string_view mode_name(Mode mode);          // "nnm", "wnnm", "gwnnm"
std::optional<Mode> parse_mode(std::string_view text);  // case-insensitive

struct DenoiseConfig {
  double sigma_n = 25.0;
  Mode mode = Mode::kGwnnm;
  int iterations = 12;  // L; the loop runs L - 1 times and returns y^(L)
  double delta = 0.1;   // weight of the noisy-input feedback
  double eta = 0.01;    // weight of the high/low spectrum feedback
  double gamma = 0.6;
  std::optional<double> alpha_override;
  double tau = 0.5;
  double c = 2.0 * 1.4142135623730951;
  double eps = 1e-16;
  PatchSpec patch;
  std::uint64_t seed = 0;
  bool clip_input = false;
  int threads = 0;  // 0: hardware concurrency, capped by LRD_THREADS

  // Throws InvalidArgument when a field is out of range.
  void validate() const;

  // Effective mixing weight: 1 outside GWNNM mode, else the override or
  // alpha_for(sigma_n).
  double alpha() const;

  // Effective spectrum-feedback weight: 0 outside GWNNM mode.
  double effective_eta() const;
};

// Defaults by noise level. Patch size, group size and iteration count follow
// the usual WNNM bands; the search window is 31 pixels (61 with
// pseudo_periodic set, for fingerprint-like images).
DenoiseConfig parameter_defaults(double sigma_n, Mode mode = Mode::kGwnnm,
                                 bool pseudo_periodic = false);

// y_k + delta * (y - y_k) + eta * (y_high - y_low), pixel by pixel.
Image regularize_step(const Image& y, const Image& y_k, const Image& y_high, const Image& y_low,
                      double delta, double eta);

// Low-rank estimates for one group of similar patches. All three matrices
// have the layout of the input group. The group mean (across columns) is
// removed before the SVD and added back to `full` only, so
// full = mean + high + low.
struct GroupEstimate {
  Eigen::MatrixXd full;
  Eigen::MatrixXd high;
  Eigen::MatrixXd low;
  Eigen::VectorXd mean;
  std::vector<PatchRef> refs;
};

// Singular-value thresholds for a group under `mode`. WNNM/GWNNM scale the
// reweighting by twice the noise variance; NNM uses one threshold at the expected
// top singular value of a pure-noise group.
Eigen::VectorXd group_thresholds(const Eigen::VectorXd& sigma, int rows, int patch_count,
                                 double sigma_hat, const DenoiseConfig& config);

GroupEstimate process_patch(const PatchMatrix& group, double sigma_hat,
                            const DenoiseConfig& config);

// Same as process_patch with explicit thresholds, bypassing the mode logic.
GroupEstimate process_patch_with_thresholds(const PatchMatrix& group,
                                            const Eigen::VectorXd& thresholds, double tau);

struct DenoiseResult {
  Image image;
  Image low;
  Image high;
  std::vector<NoiseState> trace;  // one entry per outer iteration
};

// Called once per finished outer iteration.
using IterationCallback = std::function<void(const NoiseState&, const Image&)>;

DenoiseResult denoise(const Image& noisy, const DenoiseConfig& config,
                      const IterationCallback& on_iteration = {});

// Worker count from config.threads and the LRD_THREADS environment variable.
int resolve_threads(int requested);

}  // namespace lrd
