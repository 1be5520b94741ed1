#include "lrd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "lrd/errors.hpp"

namespace lrd {

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kNnm:
      return "nnm";
    case Mode::kWnnm:
      return "wnnm";
    case Mode::kGwnnm:
      return "gwnnm";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "nnm") return Mode::kNnm;
  if (lower == "wnnm") return Mode::kWnnm;
  if (lower == "gwnnm") return Mode::kGwnnm;
  return std::nullopt;
}

void DenoiseConfig::validate() const {
  if (!(sigma_n > 0.0) || !std::isfinite(sigma_n)) throw InvalidArgument("sigma_n must be positive");
  if (iterations < 1) throw InvalidArgument("iteration count L must be at least 1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in [0, 1]");
  if (!(eta >= 0.0)) throw InvalidArgument("eta must be non-negative");
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be non-negative");
  if (!(c > 0.0)) throw InvalidArgument("c must be positive");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (alpha_override && !(*alpha_override >= 0.0 && *alpha_override <= 1.0)) {
    throw InvalidArgument("alpha must lie in [0, 1]");
  }
  if (threads < 0) throw InvalidArgument("thread count must be non-negative");
  patch.validate();
}

double DenoiseConfig::alpha() const {
  if (mode != Mode::kGwnnm) return 1.0;
  return alpha_override.value_or(alpha_for(sigma_n));
}

double DenoiseConfig::effective_eta() const { return mode == Mode::kGwnnm ? eta : 0.0; }

DenoiseConfig parameter_defaults(double sigma_n, Mode mode, bool pseudo_periodic) {
  if (!(sigma_n > 0.0)) throw InvalidArgument("sigma_n must be positive");
  DenoiseConfig config;
  config.sigma_n = sigma_n;
  config.mode = mode;
  if (sigma_n <= 20.0) {
    config.patch.size = 6;
    config.patch.count = 70;
    config.iterations = 8;
  } else if (sigma_n <= 40.0) {
    config.patch.size = 7;
    config.patch.count = 90;
    config.iterations = 12;
  } else if (sigma_n <= 60.0) {
    config.patch.size = 8;
    config.patch.count = 120;
    config.iterations = 14;
  } else {
    config.patch.size = 9;
    config.patch.count = 140;
    config.iterations = 14;
  }
  config.patch.stride = 4;
  config.patch.window = pseudo_periodic ? 61 : 31;
  config.c = 2.0 * std::sqrt(2.0);
  config.eta = 0.01;
  config.tau = 0.5;
  config.eps = 1e-16;
  config.delta = 0.1;
  config.gamma = 0.6;
  return config;
}

Image regularize_step(const Image& y, const Image& y_k, const Image& y_high, const Image& y_low,
                      double delta, double eta) {
  if (!y.same_shape(y_k) || !y.same_shape(y_high) || !y.same_shape(y_low)) {
    throw DimensionMismatch("regularize_step: images differ in size");
  }
  Image out = y_k;
  auto o = out.pixels();
  auto noisy = y.pixels();
  auto hi = y_high.pixels();
  auto lo = y_low.pixels();
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] = o[i] + delta * (noisy[i] - o[i]) + eta * (hi[i] - lo[i]);
  }
  return out;
}

Eigen::VectorXd group_thresholds(const Eigen::VectorXd& sigma, int rows, int patch_count,
                                 double sigma_hat, const DenoiseConfig& config) {
  if (config.mode == Mode::kNnm) {
    const double theta =
        sigma_hat * (std::sqrt(static_cast<double>(rows)) + std::sqrt(static_cast<double>(patch_count)));
    return Eigen::VectorXd::Constant(sigma.size(), theta);
  }
  const Eigen::VectorXd adjusted = adjust_singulars(sigma, patch_count, sigma_hat);
  const Eigen::VectorXd weights = wnnm_weights(adjusted, config.c, patch_count, config.eps);
  return 2.0 * (sigma_hat * sigma_hat) * weights;
}

namespace {

struct CenteredGroup {
  Eigen::VectorXd mean;
  SvdFactors factors;
};

CenteredGroup center_and_factor(const PatchMatrix& group) {
  CenteredGroup out;
  out.mean = group.data.rowwise().mean();
  out.factors = svd(group.data.colwise() - out.mean);
  return out;
}

GroupEstimate shrink_group(const PatchMatrix& group, CenteredGroup&& centered,
                           const Eigen::VectorXd& thresholds, double tau) {
  GroupEstimate out;
  out.refs = group.refs;
  out.mean = std::move(centered.mean);
  const Eigen::VectorXd shrunk = wnnm_shrink(centered.factors.sigma, thresholds);
  const SpectrumSplit split = split_spectrum(shrunk, tau);
  out.high = recompose(centered.factors, split.high);
  out.low = recompose(centered.factors, split.low);
  out.full = (out.high + out.low).colwise() + out.mean;
  return out;
}

}  // namespace

GroupEstimate process_patch_with_thresholds(const PatchMatrix& group,
                                            const Eigen::VectorXd& thresholds, double tau) {
  return shrink_group(group, center_and_factor(group), thresholds, tau);
}

GroupEstimate process_patch(const PatchMatrix& group, double sigma_hat,
                            const DenoiseConfig& config) {
  if (!(sigma_hat >= 0.0)) throw InvalidArgument("process_patch: sigma_hat must be non-negative");
  CenteredGroup centered = center_and_factor(group);
  const Eigen::VectorXd thresholds =
      group_thresholds(centered.factors.sigma, static_cast<int>(group.data.rows()),
                       static_cast<int>(group.data.cols()), sigma_hat, config);
  return shrink_group(group, std::move(centered), thresholds, config.tau);
}

int resolve_threads(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LRD_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min<long>(n, cap);
  }
  return std::max(n, 1);
}

namespace {

void add_columns(Aggregator& acc, const Eigen::MatrixXd& values, const std::vector<PatchRef>& refs,
                 int size) {
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    acc.add(refs[static_cast<std::size_t>(j)], size,
            std::span<const double>(values.col(j).data(), static_cast<std::size_t>(values.rows())));
  }
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const auto worker_count = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  for (std::size_t w = 0; w < worker_count; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

DenoiseResult denoise(const Image& noisy, const DenoiseConfig& config,
                      const IterationCallback& on_iteration) {
  config.validate();
  const Image y = config.clip_input ? clamped(noisy) : noisy;
  const std::vector<PatchRef> keys = key_patch_grid(y, config.patch);
  const int threads = resolve_threads(config.threads);
  const double alpha = config.alpha();
  const double eta = config.effective_eta();
  const int d = config.patch.size;

  DenoiseResult result{y, y, y, {}};
  Image& y_k = result.image;
  Image& y_low = result.low;
  Image& y_high = result.high;

  // Groups are processed in fixed-size batches and folded into the
  // aggregators in key order, so the sums do not depend on thread timing.
  const std::size_t batch = 256;
  std::vector<GroupEstimate> estimates(batch);

  for (int k = 1; k < config.iterations; ++k) {
    NoiseState state;
    state.iteration = k;
    state.sigma_n = config.sigma_n;
    state.gamma = config.gamma;
    state.alpha = alpha;
    if (k == 1) {
      state.sigma_res = config.sigma_n;
      state.sigma_res_geom = config.sigma_n;
      state.sigma_hat = config.sigma_n;
    } else {
      state.sigma_flt = filtered_noise_std(y, y_k);
      state.sigma_res = residual_std(config.sigma_n, state.sigma_flt, config.gamma);
      if (config.mode == Mode::kGwnnm) {
        state.sigma_geom = estimate_weak_texture(y_k, d, config.seed).sigma;
        state.sigma_res_geom = geometric_residual_std(config.sigma_n, state.sigma_geom, config.gamma);
        state.sigma_hat = combined_estimate(state.sigma_res, state.sigma_res_geom, alpha);
      } else {
        state.sigma_res_geom = state.sigma_res;
        state.sigma_hat = state.sigma_res;
      }
    }

    const Image current = regularize_step(y, y_k, y_high, y_low, config.delta, eta);
    Aggregator full(y.width(), y.height());
    Aggregator high(y.width(), y.height());
    Aggregator low(y.width(), y.height());

    for (std::size_t start = 0; start < keys.size(); start += batch) {
      const std::size_t n = std::min(batch, keys.size() - start);
      parallel_for(n, threads, [&](std::size_t i) {
        const PatchMatrix group = block_match(current, keys[start + i], config.patch);
        estimates[i] = process_patch(group, state.sigma_hat, config);
      });
      for (std::size_t i = 0; i < n; ++i) {
        add_columns(full, estimates[i].full, estimates[i].refs, d);
        add_columns(high, estimates[i].high, estimates[i].refs, d);
        add_columns(low, estimates[i].low, estimates[i].refs, d);
      }
    }

    y_k = full.finish(current);
    y_high = high.finish(current);
    y_low = low.finish(current);
    result.trace.push_back(state);
    if (on_iteration) on_iteration(state, y_k);
  }
  return result;
}

}  // namespace lrd
