#include <doctest.h>

#include <fstream>
#include <sstream>

#include "lrd/cli.hpp"
#include "lrd/image.hpp"
#include "test_helpers.hpp"

using namespace lrd;
using lrd::testing::TempDir;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Image scene(int side) {
  Image img(side, side);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) img(r, c) = ((r / 8 + c / 8) % 2 ? 180.0 : 60.0) + c;
  }
  return img;
}

// Small, fast parameter set shared by the CLI runs below.
const std::vector<std::string> kFast{"-L", "3", "--patch-size", "5", "--patch-count", "20",
                                     "--window", "15", "--stride", "3"};

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("cli denoise happy path") {
  TempDir dir("cli");
  save_image(scene(40), dir / "clean.pgm");
  const auto args = cat({"denoise", "-i", (dir / "clean.pgm").string(), "-o", (dir / "out.pgm").string(),
                         "--sigma", "25", "--add-noise", "--seed", "5", "--clean",
                         (dir / "clean.pgm").string(), "--emit-components", "-q"},
                        kFast);
  const CliRun first = run(args);
  REQUIRE(first.code == 0);
  CHECK(first.out.rfind("psnr_noisy=", 0) == 0);
  CHECK(first.out.find(" psnr=") != std::string::npos);
  CHECK(first.out.find(" psnr_clamped=") != std::string::npos);
  for (const char* f : {"out.pgm", "out.trace.csv", "out_low.pgm", "out_high.pgm", "out_noisy.pgm"}) {
    CAPTURE(f);
    CHECK(std::filesystem::exists(dir / f));
  }
  CHECK(load_image(dir / "out.pgm").width() == 40);
  const std::string trace = slurp(dir / "out.trace.csv");
  CHECK(trace.rfind("iteration,sigma_n,", 0) == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 3);

  const std::string image_bytes = slurp(dir / "out.pgm");
  const CliRun second = run(args);
  CHECK(second.out == first.out);
  CHECK(slurp(dir / "out.pgm") == image_bytes);
}

TEST_CASE("cli denoise argument errors") {
  TempDir dir("cli");
  save_image(scene(32), dir / "in.pgm");
  const std::string in = (dir / "in.pgm").string();
  const std::string out = (dir / "o.pgm").string();
  CHECK(run({"denoise", "-i", in, "-o", out, "--sigma", "-5"}).code == 2);
  CHECK(run({"denoise", "-i", in, "-o", out, "--sigma", "10", "--mode", "bm3d"}).code == 2);
  CHECK(run({"denoise", "-i", in, "-o", out}).code == 2);
  CHECK(run({"denoise", "-i", in, "-o", out, "--sigma", "10", "--alpha", "1.5"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
  const CliRun missing = run({"denoise", "-i", (dir / "nope.pgm").string(), "-o", out, "--sigma", "10"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("error:") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(out));
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("cli bench") {
  TempDir dir("bench");
  save_image(scene(36), dir / "a.pgm");
  save_image(scene(40), dir / "b.pgm");
  const auto args = cat({"bench", "--corpus", (dir / "a.pgm").string(), (dir / "b.pgm").string(),
                         (dir / "missing.pgm").string(), "--sigmas", "20", "40", "--seed", "3",
                         "--out-dir", (dir / "out").string()},
                        kFast);
  const CliRun first = run(args);
  REQUIRE(first.code == 0);
  const std::string csv = slurp(dir / "out" / "bench.csv");
  CHECK(csv.rfind("image,sigma,mode,psnr,psnr_clamped,noisy_psnr,trace,status\n", 0) == 0);
  // 3 images x 2 sigmas x 2 modes
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  CHECK(csv.find("a,20,wnnm,") != std::string::npos);
  CHECK(csv.find("b,40,gwnnm,") != std::string::npos);
  CHECK(csv.find("missing,20,wnnm,,,,,error:") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "out" / "timings.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "a_s20_gwnnm.trace.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "b_s40_wnnm.pgm"));
  CHECK(first.out.find("GWNNM") != std::string::npos);

  REQUIRE(run(args).code == 0);
  CHECK(slurp(dir / "out" / "bench.csv") == csv);

  CHECK(run(cat({"bench", "--corpus", (dir / "a.pgm").string(), "--sigmas", "--out-dir",
                 (dir / "o2").string()},
                kFast))
            .code == 2);
  CHECK(run({"bench", "--corpus", (dir / "missing.pgm").string(), "--sigmas", "20", "--out-dir",
             (dir / "o3").string()})
            .code == 1);
}

TEST_CASE("cell seeds ignore the mode and separate cells") {
  CHECK(cell_seed(1, "barbara", 50) == cell_seed(1, "barbara", 50));
  CHECK(cell_seed(1, "barbara", 50) != cell_seed(1, "barbara", 30));
  CHECK(cell_seed(1, "barbara", 50) != cell_seed(1, "house", 50));
  CHECK(cell_seed(1, "barbara", 50) != cell_seed(2, "barbara", 50));
}

TEST_CASE("cli estimate-noise") {
  TempDir dir("est");
  Image flat(160, 160, 120.0);
  save_image(flat, dir / "flat.pgm");
  const CliRun zero = run({"estimate-noise", "-i", (dir / "flat.pgm").string()});
  REQUIRE(zero.code == 0);
  CHECK(std::stod(zero.out) <= 1e-3);

  // Mid-gray base keeps most samples clear of the 0/255 clamp.
  save_image(add_gaussian_noise(Image(192, 192, 128.0), 30.0, 8), dir / "noisy.pgm");
  const CliRun noisy = run({"estimate-noise", "-i", (dir / "noisy.pgm").string()});
  REQUIRE(noisy.code == 0);
  CHECK(std::stod(noisy.out) == doctest::Approx(30.0).epsilon(0.05));

  CHECK(run({"estimate-noise", "-i", (dir / "absent.pgm").string()}).code == 1);
}
