#include "lrd/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "lrd/errors.hpp"
#include "lrd/image.hpp"
#include "lrd/random.hpp"

namespace lrd {

namespace {

std::string fixed(double value, int digits) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << value;
  return os.str();
}

// Formats a noise level without trailing zeros ("50", "12.5").
std::string sigma_label(double sigma) {
  std::ostringstream os;
  os << std::setprecision(10) << sigma;
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

// Mean-free component images are stored around mid-gray.
Image offset_for_display(const Image& img) {
  Image out = img;
  for (double& v : out.pixels()) v += 128.0;
  return out;
}

const std::map<std::string, Mode> kModeMap{
    {"nnm", Mode::kNnm}, {"wnnm", Mode::kWnnm}, {"gwnnm", Mode::kGwnnm}};

// Flags shared by `denoise` and `bench` that override the noise-level defaults.
struct Overrides {
  std::optional<int> iterations;
  std::optional<double> delta;
  std::optional<double> eta;
  std::optional<double> gamma;
  std::optional<double> alpha;
  std::optional<double> tau;
  std::optional<double> c;
  std::optional<double> eps;
  std::optional<int> patch_size;
  std::optional<int> stride;
  std::optional<int> patch_count;
  std::optional<int> window;

  void attach(CLI::App& app) {
    app.add_option("--iterations,-L", iterations, "Outer iteration count L")->check(CLI::PositiveNumber);
    app.add_option("--delta", delta, "Noisy-input feedback weight")->check(CLI::Range(0.0, 1.0));
    app.add_option("--eta", eta, "High/low spectrum feedback weight")->check(CLI::NonNegativeNumber);
    app.add_option("--gamma", gamma, "Residual-noise scaling factor")->check(CLI::PositiveNumber);
    app.add_option("--alpha", alpha, "Mixing weight of the two residual estimates")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--tau", tau, "Spectrum split threshold")->check(CLI::NonNegativeNumber);
    app.add_option("--c", c, "Weight constant")->check(CLI::PositiveNumber);
    app.add_option("--eps", eps, "Weight denominator guard")->check(CLI::PositiveNumber);
    app.add_option("--patch-size", patch_size, "Patch side d")->check(CLI::Range(2, 64));
    app.add_option("--stride", stride, "Key patch step")->check(CLI::PositiveNumber);
    app.add_option("--patch-count", patch_count, "Similar patches per group m")
        ->check(CLI::PositiveNumber);
    app.add_option("--window", window, "Search window side in pixels")->check(CLI::PositiveNumber);
  }

  void apply(DenoiseConfig& config) const {
    if (iterations) config.iterations = *iterations;
    if (delta) config.delta = *delta;
    if (eta) config.eta = *eta;
    if (gamma) config.gamma = *gamma;
    if (alpha) config.alpha_override = *alpha;
    if (tau) config.tau = *tau;
    if (c) config.c = *c;
    if (eps) config.eps = *eps;
    if (patch_size) config.patch.size = *patch_size;
    if (stride) config.patch.stride = *stride;
    if (patch_count) config.patch.count = *patch_count;
    if (window) config.patch.window = *window;
  }
};

std::filesystem::path with_suffix(const std::filesystem::path& path, const std::string& suffix) {
  auto stem = path.stem().string();
  return path.parent_path() / (stem + suffix);
}

struct DenoiseArgs {
  std::string input;
  std::string output;
  double sigma = 0.0;
  std::string mode = "gwnnm";
  bool add_noise = false;
  std::uint64_t seed = 0;
  std::string clean;
  bool emit_components = false;
  std::string trace;
  bool clip_input = false;
  bool pseudo_periodic = false;
  int threads = 0;
  bool quiet = false;
  Overrides overrides;
};

int cmd_denoise(const DenoiseArgs& args, std::ostream& out, std::ostream& err) {
  DenoiseConfig config = parameter_defaults(args.sigma, kModeMap.at(args.mode), args.pseudo_periodic);
  args.overrides.apply(config);
  config.seed = args.seed;
  config.clip_input = args.clip_input;
  config.threads = args.threads;
  try {
    config.validate();
  } catch (const InvalidArgument& e) {
    err << "denoise: " << e.what() << "\n";
    return 2;
  }

  Image input = load_image(args.input);
  const Image noisy = args.add_noise ? add_gaussian_noise(input, args.sigma, args.seed) : input;
  std::optional<Image> clean;
  if (!args.clean.empty()) clean = load_image(args.clean);

  const auto result = denoise(noisy, config, [&](const NoiseState& s, const Image&) {
    if (!args.quiet) {
      err << "iteration " << s.iteration << "/" << config.iterations - 1
          << " sigma_hat=" << fixed(s.sigma_hat, 4) << "\n";
    }
  });

  const std::filesystem::path out_path = args.output;
  save_image(result.image, out_path);
  const std::filesystem::path trace_path =
      args.trace.empty() ? with_suffix(out_path, ".trace.csv") : std::filesystem::path(args.trace);
  std::ostringstream trace;
  write_trace_csv(result.trace, trace);
  write_text_file(trace_path, trace.str());
  if (args.emit_components) {
    save_image(offset_for_display(result.low), with_suffix(out_path, "_low.pgm"));
    save_image(offset_for_display(result.high), with_suffix(out_path, "_high.pgm"));
  }
  if (args.add_noise) save_image(noisy, with_suffix(out_path, "_noisy.pgm"));

  if (clean) {
    out << "psnr_noisy=" << fixed(psnr(noisy, *clean), 4)
        << " psnr=" << fixed(psnr(result.image, *clean), 4)
        << " psnr_clamped=" << fixed(psnr(clamped(result.image), *clean), 4) << "\n";
  }
  return 0;
}

struct EstimateArgs {
  std::string input;
  int patch_size = 7;
  std::uint64_t seed = 0;
};

int cmd_estimate_noise(const EstimateArgs& args, std::ostream& out) {
  const Image img = load_image(args.input);
  const auto estimate = estimate_weak_texture(img, args.patch_size, args.seed);
  out << fixed(estimate.sigma, 4) << "\n" << fixed(estimate.all_patch_sigma, 4) << "\n";
  return 0;
}

struct BenchArgs {
  std::vector<std::string> corpus;
  std::vector<double> sigmas;
  std::vector<std::string> modes{"wnnm", "gwnnm"};
  std::uint64_t seed = 0;
  std::string output_dir = "bench-out";
  std::optional<int> crop;
  bool pseudo_periodic = false;
  bool no_images = false;
  int threads = 0;
  Overrides overrides;
};

}  // namespace

std::uint64_t cell_seed(std::uint64_t master, const std::string& image, double sigma) {
  std::uint64_t h = fnv1a64(&master, sizeof master);
  h = fnv1a64(image.data(), image.size(), h);
  const std::string label = sigma_label(sigma);
  return fnv1a64(label.data(), label.size(), h);
}

void write_trace_csv(const std::vector<NoiseState>& trace, std::ostream& out) {
  out << "iteration,sigma_n,sigma_flt,sigma_res,sigma_geom,sigma_res_geom,sigma_hat,gamma,alpha\n";
  for (const auto& s : trace) {
    out << s.iteration << ',' << fixed(s.sigma_n, 6) << ',' << fixed(s.sigma_flt, 6) << ','
        << fixed(s.sigma_res, 6) << ',' << fixed(s.sigma_geom, 6) << ','
        << fixed(s.sigma_res_geom, 6) << ',' << fixed(s.sigma_hat, 6) << ','
        << fixed(s.gamma, 6) << ',' << fixed(s.alpha, 6) << '\n';
  }
}

void write_bench_csv(const BenchReport& report, std::ostream& out) {
  out << "image,sigma,mode,psnr,psnr_clamped,noisy_psnr,trace,status\n";
  for (const auto& r : report.rows) {
    out << r.image << ',' << sigma_label(r.sigma) << ',' << mode_name(r.mode) << ',';
    if (r.error.empty()) {
      out << fixed(r.psnr, 2) << ',' << fixed(r.psnr_clamped, 2) << ',' << fixed(r.noisy_psnr, 2)
          << ',' << r.trace_file << ",ok\n";
    } else {
      std::string message = r.error;
      for (char& ch : message) {
        if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
      }
      out << ",,,," << "error: " << message << '\n';
    }
  }
}

void write_timings_csv(const BenchReport& report, std::ostream& out) {
  out << "image,sigma,mode,seconds\n";
  for (const auto& r : report.rows) {
    out << r.image << ',' << sigma_label(r.sigma) << ',' << mode_name(r.mode) << ','
        << fixed(r.seconds, 3) << '\n';
  }
}

void print_bench_table(const BenchReport& report, std::ostream& out) {
  std::vector<Mode> modes;
  for (const auto& r : report.rows) {
    if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
  }
  out << std::left << std::setw(16) << "image" << std::setw(8) << "sigma";
  for (Mode m : modes) {
    std::string name(mode_name(m));
    std::transform(name.begin(), name.end(), name.begin(), ::toupper);
    out << std::setw(9) << name;
  }
  out << '\n';
  for (std::size_t i = 0; i < report.rows.size();) {
    const auto& first = report.rows[i];
    out << std::left << std::setw(16) << first.image << std::setw(8) << sigma_label(first.sigma);
    std::map<Mode, std::string> cells;
    std::size_t j = i;
    for (; j < report.rows.size() && report.rows[j].image == first.image &&
           report.rows[j].sigma == first.sigma;
         ++j) {
      cells[report.rows[j].mode] = report.rows[j].error.empty() ? fixed(report.rows[j].psnr, 2) : "fail";
    }
    for (Mode m : modes) out << std::setw(9) << (cells.count(m) ? cells[m] : "-");
    out << '\n';
    i = j;
  }
}

BenchReport run_bench(const BenchSpec& spec, std::ostream& log) {
  if (spec.corpus.empty()) throw InvalidArgument("bench: corpus is empty");
  if (spec.sigmas.empty()) throw InvalidArgument("bench: no noise levels given");
  if (spec.modes.empty()) throw InvalidArgument("bench: no modes given");
  for (double s : spec.sigmas) {
    if (!(s > 0.0)) throw InvalidArgument("bench: noise levels must be positive");
  }
  std::filesystem::create_directories(spec.output_dir);

  BenchReport report;
  for (const auto& path : spec.corpus) {
    const std::string name = path.stem().string();
    std::optional<Image> clean;
    std::string load_error;
    try {
      clean = load_image(path);
      if (spec.crop) {
        const int side = *spec.crop;
        if (side > clean->width() || side > clean->height()) {
          throw ImageTooSmall("crop " + std::to_string(side) + " exceeds image size");
        }
        clean = crop(*clean, (clean->height() - side) / 2, (clean->width() - side) / 2, side, side);
      }
    } catch (const Error& e) {
      load_error = e.what();
      log << "warning: skipping " << path.string() << ": " << load_error << "\n";
    }

    for (double sigma : spec.sigmas) {
      const std::uint64_t seed = cell_seed(spec.seed, name, sigma);
      std::optional<Image> noisy;
      if (clean) noisy = add_gaussian_noise(*clean, sigma, seed);
      for (Mode mode : spec.modes) {
        BenchRow row;
        row.image = name;
        row.sigma = sigma;
        row.mode = mode;
        if (!clean) {
          row.error = load_error;
          report.rows.push_back(row);
          continue;
        }
        const std::string cell = name + "_s" + sigma_label(sigma) + "_" + std::string(mode_name(mode));
        try {
          DenoiseConfig config = parameter_defaults(sigma, mode, spec.pseudo_periodic);
          config.seed = seed;
          config.threads = spec.threads;
          if (spec.adjust) spec.adjust(config);
          config.validate();
          const auto start = std::chrono::steady_clock::now();
          const auto result = denoise(*noisy, config);
          row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          row.psnr = psnr(result.image, *clean);
          row.psnr_clamped = psnr(clamped(result.image), *clean);
          row.noisy_psnr = psnr(*noisy, *clean);
          row.trace_file = cell + ".trace.csv";
          std::ostringstream trace;
          write_trace_csv(result.trace, trace);
          write_text_file(spec.output_dir / row.trace_file, trace.str());
          if (spec.save_images) save_image(result.image, spec.output_dir / (cell + ".pgm"));
          log << cell << ": psnr " << fixed(row.psnr, 2) << " dB (" << fixed(row.seconds, 1)
              << " s)\n";
        } catch (const Error& e) {
          row.error = e.what();
          log << "warning: " << cell << " failed: " << row.error << "\n";
        }
        report.rows.push_back(row);
      }
    }
  }

  std::ostringstream csv;
  write_bench_csv(report, csv);
  write_text_file(spec.output_dir / "bench.csv", csv.str());
  std::ostringstream timings;
  write_timings_csv(report, timings);
  write_text_file(spec.output_dir / "timings.csv", timings.str());
  return report;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Patch-based low-rank image denoising (NNM / WNNM / GWNNM)", "lrdenoise"};
  app.require_subcommand(1);

  DenoiseArgs dn;
  auto* denoise_cmd = app.add_subcommand("denoise", "Denoise one grayscale PGM image");
  denoise_cmd->add_option("--input,-i", dn.input, "Noisy input PGM (clean image with --add-noise)")
      ->required();
  denoise_cmd->add_option("--out,-o", dn.output, "Output PGM")->required();
  denoise_cmd->add_option("--sigma,-s", dn.sigma, "Noise standard deviation")
      ->required()
      ->check(CLI::PositiveNumber);
  denoise_cmd->add_option("--mode,-m", dn.mode, "nnm, wnnm or gwnnm")
      ->transform(CLI::IsMember({"nnm", "wnnm", "gwnnm"}, CLI::ignore_case));
  denoise_cmd->add_flag("--add-noise", dn.add_noise, "Add Gaussian noise of --sigma to the input first");
  denoise_cmd->add_option("--seed", dn.seed, "Seed for noise synthesis and calibration");
  denoise_cmd->add_option("--clean", dn.clean, "Clean reference; prints PSNR");
  denoise_cmd->add_flag("--emit-components", dn.emit_components,
                        "Also write the low/high spectrum images (offset by 128)");
  denoise_cmd->add_option("--trace", dn.trace, "Noise-trace CSV path (default <out>.trace.csv)");
  denoise_cmd->add_flag("--clip-input", dn.clip_input, "Clamp the noisy input to [0,255] first");
  denoise_cmd->add_flag("--pseudo-periodic", dn.pseudo_periodic,
                        "Use the wide search window for fingerprint-like images");
  denoise_cmd->add_option("--threads", dn.threads, "Worker threads (0: all cores)")
      ->check(CLI::NonNegativeNumber);
  denoise_cmd->add_flag("--quiet,-q", dn.quiet, "No per-iteration log");
  dn.overrides.attach(*denoise_cmd);

  BenchArgs bn;
  auto* bench_cmd = app.add_subcommand("bench", "PSNR benchmark over a corpus of clean images");
  bench_cmd->add_option("--corpus", bn.corpus, "Clean PGM images")->required();
  bench_cmd->add_option("--sigmas", bn.sigmas, "Noise levels")->required()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--modes", bn.modes, "Subset of nnm, wnnm, gwnnm")
      ->transform(CLI::IsMember({"nnm", "wnnm", "gwnnm"}, CLI::ignore_case));
  bench_cmd->add_option("--seed", bn.seed, "Master seed");
  bench_cmd->add_option("--out-dir", bn.output_dir, "Directory for CSVs, traces and images");
  bench_cmd->add_option("--crop", bn.crop, "Centered square crop side")->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--pseudo-periodic", bn.pseudo_periodic, "Use the wide search window");
  bench_cmd->add_flag("--no-images", bn.no_images, "Do not write denoised images");
  bench_cmd->add_option("--threads", bn.threads, "Worker threads (0: all cores)")
      ->check(CLI::NonNegativeNumber);
  bn.overrides.attach(*bench_cmd);

  EstimateArgs es;
  auto* estimate_cmd =
      app.add_subcommand("estimate-noise", "Blind noise level from weak-texture patches");
  estimate_cmd->add_option("--input,-i", es.input, "Input PGM")->required();
  estimate_cmd->add_option("--patch-size", es.patch_size, "Patch side")->check(CLI::Range(2, 64));
  estimate_cmd->add_option("--seed", es.seed, "Calibration seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << "Run with --help for usage.\n";
    return 2;
  }

  try {
    if (*denoise_cmd) return cmd_denoise(dn, out, err);
    if (*estimate_cmd) return cmd_estimate_noise(es, out);
    if (*bench_cmd) {
      BenchSpec spec;
      for (const auto& p : bn.corpus) spec.corpus.emplace_back(p);
      spec.sigmas = bn.sigmas;
      spec.modes.clear();
      for (const auto& m : bn.modes) spec.modes.push_back(kModeMap.at(m));
      spec.seed = bn.seed;
      spec.output_dir = bn.output_dir;
      spec.crop = bn.crop;
      spec.pseudo_periodic = bn.pseudo_periodic;
      spec.save_images = !bn.no_images;
      spec.threads = bn.threads;
      spec.adjust = [&bn](DenoiseConfig& c) { bn.overrides.apply(c); };
      const BenchReport report = run_bench(spec, err);
      print_bench_table(report, out);
      const bool any_ok = std::any_of(report.rows.begin(), report.rows.end(),
                                      [](const BenchRow& r) { return r.error.empty(); });
      return any_ok ? 0 : 1;
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace lrd
