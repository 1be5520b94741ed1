#include "lrd/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "lrd/errors.hpp"
#include "lrd/random.hpp"

namespace lrd {

namespace {

void check_dimensions(int width, int height) {
  if (width < 1 || height < 1) {
    throw InvalidArgument("image dimensions must be positive, got " +
                          std::to_string(width) + "x" + std::to_string(height));
  }
}

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments, then parses one decimal integer.
  long next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw MalformedFile("PGM header: expected a decimal number");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > std::numeric_limits<int>::max()) {
        throw MalformedFile("PGM header: number out of range");
      }
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw MalformedFile("PGM header: missing whitespace before raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

Image::Image(int width, int height, double fill)
    : width_(width), height_(height) {
  check_dimensions(width, height);
  if (!std::isfinite(fill)) throw InvalidArgument("image fill value must be finite");
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Image::Image(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_dimensions(width, height);
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DimensionMismatch("pixel count does not match " + std::to_string(width) + "x" +
                            std::to_string(height));
  }
  if (!std::all_of(pixels_.begin(), pixels_.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidArgument("image pixels must be finite");
  }
}

Image decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw MalformedFile("not a PNM file (bad magic)");
  }
  if (bytes[1] != '5') {
    if (bytes[1] >= '1' && bytes[1] <= '7') {
      throw UnsupportedFormat(std::string("only binary grayscale PGM (P5) is supported, got P") +
                              static_cast<char>(bytes[1]));
    }
    throw MalformedFile("not a PNM file (bad magic)");
  }
  HeaderReader header(bytes);
  const long width = header.next_int();
  const long height = header.next_int();
  const long maxval = header.next_int();
  if (width < 1 || height < 1) throw MalformedFile("PGM header: zero dimension");
  if (maxval != 255) {
    throw UnsupportedFormat("only maxval 255 is supported, got " + std::to_string(maxval));
  }
  const std::size_t offset = header.raster_offset();
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - offset < count) throw MalformedFile("PGM raster is truncated");

  std::vector<double> pixels(count);
  std::transform(bytes.begin() + offset, bytes.begin() + offset + count, pixels.begin(),
                 [](std::uint8_t b) { return static_cast<double>(b); });
  return Image(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

std::uint8_t to_byte(double value) {
  return static_cast<std::uint8_t>(std::round(std::clamp(value, 0.0, 255.0)));
}

std::vector<std::uint8_t> encode_pgm(const Image& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.size());
  for (double v : img.pixels()) out.push_back(to_byte(v));
  return out;
}

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return decode_pgm(bytes);
}

void save_image(const Image& img, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("noise sigma must be finite and non-negative");
  }
  Image out = img;
  if (sigma == 0.0) return out;
  GaussianSource gauss(seed);
  for (double& v : out.pixels()) v += sigma * gauss();
  return out;
}

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw DimensionMismatch("psnr: images differ in size");
  double sum = 0.0;
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double diff = pa[i] - pb[i];
    sum += diff * diff;
  }
  if (sum == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sum / static_cast<double>(pa.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

Image clamped(const Image& img) {
  Image out = img;
  for (double& v : out.pixels()) v = std::clamp(v, 0.0, 255.0);
  return out;
}

Image crop(const Image& img, int row, int col, int height, int width) {
  if (row < 0 || col < 0 || height < 1 || width < 1 || row + height > img.height() ||
      col + width > img.width()) {
    throw DimensionMismatch("crop rectangle outside the image");
  }
  Image out(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out(r, c) = img(row + r, col + c);
  }
  return out;
}

}  // namespace lrd
