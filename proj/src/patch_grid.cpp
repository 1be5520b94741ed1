#include "lrd/patch_grid.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "lrd/errors.hpp"

namespace lrd {

void PatchSpec::validate() const {
  if (size < 2) throw InvalidArgument("patch size must be at least 2");
  if (stride < 1 || stride > size) throw InvalidArgument("stride must lie in [1, patch size]");
  if (count < 1) throw InvalidArgument("patch count must be at least 1");
  if (window < size) throw InvalidArgument("search window must be at least the patch size");
}

std::vector<int> grid_offsets(int last, int stride) {
  std::vector<int> offsets;
  for (int v = 0; v <= last; v += stride) offsets.push_back(v);
  if (offsets.back() != last) offsets.push_back(last);
  return offsets;
}

std::vector<PatchRef> key_patch_grid(const Image& img, const PatchSpec& spec) {
  spec.validate();
  if (img.width() < spec.size || img.height() < spec.size) {
    throw ImageTooSmall("image " + std::to_string(img.width()) + "x" +
                        std::to_string(img.height()) + " is smaller than one " +
                        std::to_string(spec.size) + "x" + std::to_string(spec.size) + " patch");
  }
  const auto rows = grid_offsets(img.height() - spec.size, spec.stride);
  const auto cols = grid_offsets(img.width() - spec.size, spec.stride);
  std::vector<PatchRef> refs;
  refs.reserve(rows.size() * cols.size());
  for (int r : rows) {
    for (int c : cols) refs.push_back({r, c});
  }
  return refs;
}

namespace {

// Start positions [begin, end) along one axis for a window of `window` pixels
// centered on a patch at `pos`, shifted to stay within [0, extent).
std::pair<int, int> window_axis(int pos, int size, int window, int extent) {
  const int span = std::min(window, extent);
  int begin = pos - (span - size) / 2;
  begin = std::clamp(begin, 0, extent - span);
  return {begin, begin + span - size + 1};
}

}  // namespace

SearchWindow search_window(const Image& img, PatchRef key, const PatchSpec& spec) {
  const auto [rb, re] = window_axis(key.row, spec.size, spec.window, img.height());
  const auto [cb, ce] = window_axis(key.col, spec.size, spec.window, img.width());
  return {rb, re, cb, ce};
}

double patch_ssd(const Image& img, PatchRef a, PatchRef b, int size) {
  double sum = 0.0;
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const double diff = img(a.row + r, a.col + c) - img(b.row + r, b.col + c);
      sum += diff * diff;
    }
  }
  return sum;
}

void extract_patch(const Image& img, PatchRef ref, int size, std::span<double> out) {
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) out[static_cast<std::size_t>(r * size + c)] = img(ref.row + r, ref.col + c);
  }
}

PatchMatrix block_match(const Image& img, PatchRef key, const PatchSpec& spec) {
  spec.validate();
  const int d = spec.size;
  if (key.row < 0 || key.col < 0 || key.row + d > img.height() || key.col + d > img.width()) {
    throw InvalidArgument("key patch lies outside the image");
  }
  const SearchWindow win = search_window(img, key, spec);
  if (win.candidates() < spec.count) {
    throw InsufficientCandidates("search window holds " + std::to_string(win.candidates()) +
                                 " positions, need " + std::to_string(spec.count));
  }

  struct Candidate {
    double ssd;
    int order;  // row-major rank inside the window
    PatchRef ref;
  };
  std::vector<Candidate> others;
  others.reserve(static_cast<std::size_t>(win.candidates()));
  int order = 0;
  for (int r = win.row_begin; r < win.row_end; ++r) {
    for (int c = win.col_begin; c < win.col_end; ++c, ++order) {
      if (r == key.row && c == key.col) continue;
      others.push_back({patch_ssd(img, key, {r, c}, d), order, {r, c}});
    }
  }
  const auto keep = static_cast<std::ptrdiff_t>(spec.count - 1);
  std::partial_sort(others.begin(), others.begin() + keep, others.end(),
                    [](const Candidate& a, const Candidate& b) {
                      return a.ssd < b.ssd || (a.ssd == b.ssd && a.order < b.order);
                    });

  PatchMatrix out;
  out.key = key;
  out.patch_size = d;
  out.data.resize(d * d, spec.count);
  out.refs.reserve(static_cast<std::size_t>(spec.count));
  out.distances.reserve(static_cast<std::size_t>(spec.count));
  out.refs.push_back(key);
  out.distances.push_back(0.0);
  for (std::ptrdiff_t i = 0; i < keep; ++i) {
    out.refs.push_back(others[static_cast<std::size_t>(i)].ref);
    out.distances.push_back(others[static_cast<std::size_t>(i)].ssd);
  }
  for (int j = 0; j < spec.count; ++j) {
    extract_patch(img, out.refs[static_cast<std::size_t>(j)], d,
                  std::span<double>(out.data.col(j).data(), static_cast<std::size_t>(d * d)));
  }
  return out;
}

Aggregator::Aggregator(int width, int height)
    : width_(width),
      height_(height),
      numerator_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0),
      denominator_(numerator_.size(), 0.0) {}

void Aggregator::add(PatchRef ref, int size, std::span<const double> values, double weight) {
  if (ref.row < 0 || ref.col < 0 || ref.row + size > height_ || ref.col + size > width_) {
    throw DimensionMismatch("patch estimate lies outside the aggregation image");
  }
  if (values.size() != static_cast<std::size_t>(size * size)) {
    throw LengthMismatch("patch estimate has the wrong number of values");
  }
  if (!(weight > 0.0)) throw InvalidArgument("aggregation weight must be positive");
  for (int r = 0; r < size; ++r) {
    const std::size_t base = static_cast<std::size_t>(ref.row + r) * static_cast<std::size_t>(width_) +
                             static_cast<std::size_t>(ref.col);
    for (int c = 0; c < size; ++c) {
      numerator_[base + static_cast<std::size_t>(c)] += weight * values[static_cast<std::size_t>(r * size + c)];
      denominator_[base + static_cast<std::size_t>(c)] += weight;
    }
  }
}

Image Aggregator::finish(const Image& fallback) const {
  if (fallback.width() != width_ || fallback.height() != height_) {
    throw DimensionMismatch("fallback image differs in size from the aggregation target");
  }
  Image out = fallback;
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (denominator_[i] > 0.0) px[i] = numerator_[i] / denominator_[i];
  }
  return out;
}

Image aggregate(std::span<const PatchEstimate> estimates, int patch_size, int width, int height,
                const Image& fallback) {
  Aggregator acc(width, height);
  for (const auto& e : estimates) acc.add(e.ref, patch_size, e.values, e.weight);
  return acc.finish(fallback);
}

}  // namespace lrd
