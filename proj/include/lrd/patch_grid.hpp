#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "lrd/image.hpp"

namespace lrd {

// Geometry of the patch search.
struct PatchSpec {
  int size = 8;      // patch side d
  int stride = 4;    // step between key patches
  int count = 120;   // similar patches per group, m
  int window = 31;   // side of the square search window, in pixels

  // Throws InvalidArgument unless 2 <= size, 1 <= stride <= size,
  // count >= 1 and window >= size.
  void validate() const;
};

// Top-left corner of a size x size patch.
struct PatchRef {
  int row = 0;
  int col = 0;
  friend bool operator==(const PatchRef&, const PatchRef&) = default;
};

// Group of similar patches. Column i of `data` holds patch refs[i] flattened
// row-major; column 0 is the key patch.
struct PatchMatrix {
  Eigen::MatrixXd data;
  std::vector<PatchRef> refs;
  std::vector<double> distances;  // SSD of each column to the key
  PatchRef key;
  int patch_size = 0;
};

// Key patches on a regular grid with step spec.stride. The last valid row and
// column are always included so every pixel is covered.
std::vector<PatchRef> key_patch_grid(const Image& img, const PatchSpec& spec);

// Start offsets 0, stride, 2*stride, ... plus `last` if the step misses it.
std::vector<int> grid_offsets(int last, int stride);

// Bounds of the search window for `key`: a window x window square centered on
// the key patch and shifted to lie inside the image. Candidate top-left
// corners are [row_begin, row_end) x [col_begin, col_end).
struct SearchWindow {
  int row_begin = 0;
  int row_end = 0;
  int col_begin = 0;
  int col_end = 0;
  int candidates() const { return (row_end - row_begin) * (col_end - col_begin); }
};
SearchWindow search_window(const Image& img, PatchRef key, const PatchSpec& spec);

// Sum of squared differences between two size x size patches.
double patch_ssd(const Image& img, PatchRef a, PatchRef b, int size);

// The spec.count patches in the search window closest to `key` in SSD. The
// key comes first, the rest follow in nondecreasing SSD with ties broken by
// row-major position. Throws InsufficientCandidates when the window holds
// fewer than spec.count positions.
PatchMatrix block_match(const Image& img, PatchRef key, const PatchSpec& spec);

// Copies the patch at `ref` into `out` (size*size values, row-major).
void extract_patch(const Image& img, PatchRef ref, int size, std::span<double> out);

// Weighted overlap averaging of patch estimates into an image.
class Aggregator {
 public:
  Aggregator(int width, int height);

  // `values` holds a size x size patch, row-major.
  void add(PatchRef ref, int size, std::span<const double> values, double weight = 1.0);

  // Per-pixel weighted mean; uncovered pixels copy `fallback`.
  Image finish(const Image& fallback) const;

 private:
  int width_;
  int height_;
  std::vector<double> numerator_;
  std::vector<double> denominator_;
};

struct PatchEstimate {
  PatchRef ref;
  std::vector<double> values;  // size x size, row-major
  double weight = 1.0;
};

Image aggregate(std::span<const PatchEstimate> estimates, int patch_size, int width, int height,
                const Image& fallback);

}  // namespace lrd
