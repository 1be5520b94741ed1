#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lrd {

// Grayscale image with real-valued pixels on the nominal 8-bit scale.
// Storage is row-major. Values may leave [0,255] during processing; they are
// only clamped when written to disk.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  double& operator()(int row, int col) { return pixels_[index(row, col)]; }
  double operator()(int row, int col) const { return pixels_[index(row, col)]; }

  std::span<double> pixels() { return pixels_; }
  std::span<const double> pixels() const { return pixels_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

// Reads a binary 8-bit grayscale PGM ("P5", maxval 255).
Image load_image(const std::filesystem::path& path);

// Writes a binary PGM. Pixels are clamped to [0,255] and rounded half away
// from zero.
void save_image(const Image& img, const std::filesystem::path& path);

// In-memory variants of the PGM codec.
Image decode_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(const Image& img);

std::uint8_t to_byte(double value);

// Returns img plus i.i.d. N(0, sigma^2) samples. The result is not clamped.
Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed);

// Peak signal-to-noise ratio in dB for peak 255. Returns +infinity for
// identical images.
double psnr(const Image& a, const Image& b);

// Copy with every pixel clamped to [0,255].
Image clamped(const Image& img);

// Copy of the rectangle [row, row+height) x [col, col+width).
Image crop(const Image& img, int row, int col, int height, int width);

}  // namespace lrd
