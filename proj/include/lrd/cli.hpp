#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lrd/noise_estimation.hpp"
#include "lrd/pipeline.hpp"

namespace lrd {

// Entry point shared by the lrdenoise executable and the tests. Returns the
// process exit status: 0 on success, 1 on I/O or pipeline failure, 2 on bad
// command-line input.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct BenchSpec {
  std::vector<std::filesystem::path> corpus;
  std::vector<double> sigmas;
  std::vector<Mode> modes{Mode::kWnnm, Mode::kGwnnm};
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "bench-out";
  std::optional<int> crop;  // centered square crop applied to every clean image
  bool pseudo_periodic = false;
  bool save_images = true;
  int threads = 0;
  std::function<void(DenoiseConfig&)> adjust;  // applied after the per-sigma defaults
};

struct BenchRow {
  std::string image;
  double sigma = 0.0;
  Mode mode = Mode::kGwnnm;
  double psnr = 0.0;
  double psnr_clamped = 0.0;
  double noisy_psnr = 0.0;
  double seconds = 0.0;
  std::string trace_file;  // relative to the output directory
  std::string error;       // non-empty when the cell failed
};

struct BenchReport {
  std::vector<BenchRow> rows;  // ordered by (corpus order, sigma order, mode order)
};

// Seed for the noise realization of one benchmark cell. It depends on the
// master seed, image name and noise level but not on the mode, so every
// mode denoises the same noisy image.
std::uint64_t cell_seed(std::uint64_t master, const std::string& image, double sigma);

// Runs every (image, sigma, mode) cell and writes bench.csv, timings.csv,
// per-cell noise traces and, if requested, the denoised images into
// spec.output_dir. Throws InvalidArgument on an empty corpus or sigma list.
BenchReport run_bench(const BenchSpec& spec, std::ostream& log);

void write_bench_csv(const BenchReport& report, std::ostream& out);
void write_timings_csv(const BenchReport& report, std::ostream& out);
void write_trace_csv(const std::vector<NoiseState>& trace, std::ostream& out);

// Summary: one line per (image, sigma), one PSNR column per mode.
void print_bench_table(const BenchReport& report, std::ostream& out);

}  // namespace lrd
