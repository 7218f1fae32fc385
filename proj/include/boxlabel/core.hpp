#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "boxlabel/error.hpp"

namespace boxlabel {

inline constexpr std::uint8_t kBackground = 0;
inline constexpr std::uint8_t kIgnore = 255;
inline constexpr int kDefaultNumClasses = 20;

struct Dims {
  int width = 0;
  int height = 0;

  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width && y < height; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 8-bit RGB image.
class Image {
 public:
  Image() = default;
  Image(Dims dims, Rgb fill = {});
  Image(Dims dims, std::vector<Rgb> pixels);

  Dims dims() const noexcept { return dims_; }
  int width() const noexcept { return dims_.width; }
  int height() const noexcept { return dims_.height; }

  const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }
  Rgb& at(int x, int y) { return pixels_[index(x, y)]; }
  std::span<const Rgb> pixels() const noexcept { return pixels_; }
  std::span<Rgb> pixels() noexcept { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(dims_.width) + static_cast<std::size_t>(x);
  }
  Dims dims_;
  std::vector<Rgb> pixels_;
};

/// Generic row-major single-channel raster; LabelMap, SegmentMask and
/// BoundaryMap are aliases over it.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  explicit Raster(Dims dims, T fill = T{}) : dims_(dims), data_(dims.pixel_count(), fill) {
    if (dims.width < 1 || dims.height < 1) {
      throw Error(ErrorCode::InvalidArgument, "raster dimensions must be positive");
    }
  }
  Raster(Dims dims, std::vector<T> data) : dims_(dims), data_(std::move(data)) {
    if (dims.width < 1 || dims.height < 1) {
      throw Error(ErrorCode::InvalidArgument, "raster dimensions must be positive");
    }
    if (data_.size() != dims.pixel_count()) {
      throw Error(ErrorCode::DimensionMismatch, "raster data size does not match dimensions");
    }
  }

  Dims dims() const noexcept { return dims_; }
  int width() const noexcept { return dims_.width; }
  int height() const noexcept { return dims_.height; }
  std::size_t size() const noexcept { return data_.size(); }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(dims_.width) + static_cast<std::size_t>(x);
  }
  Dims dims_;
  std::vector<T> data_;
};

/// Per-pixel class ids: 0 background, 1..C objects, 255 ignore.
using LabelMap = Raster<std::uint8_t>;
/// Per-pixel boolean foreground (stored as 0/1 bytes).
using SegmentMask = Raster<std::uint8_t>;
/// Per-pixel boundary probability in [0, 1].
using BoundaryMap = Raster<float>;

/// Axis-aligned box with half-open pixel extents [xmin,xmax) x [ymin,ymax).
struct Box {
  int class_id = 1;
  int xmin = 0;
  int ymin = 0;
  int xmax = 0;
  int ymax = 0;

  int width() const noexcept { return xmax - xmin; }
  int height() const noexcept { return ymax - ymin; }
  long long area() const noexcept {
    return width() > 0 && height() > 0 ? static_cast<long long>(width()) * height() : 0;
  }
  bool contains(int x, int y) const noexcept { return x >= xmin && x < xmax && y >= ymin && y < ymax; }
  friend bool operator==(const Box&, const Box&) = default;
};

/// Boxes of one image in painting order: back-to-front, i.e. descending area
/// with ties broken by ascending (ymin, xmin, class_id).
class BoxSet {
 public:
  BoxSet() = default;

  Dims image_dims() const noexcept { return dims_; }
  std::span<const Box> boxes() const noexcept { return boxes_; }
  std::size_t size() const noexcept { return boxes_.size(); }
  bool empty() const noexcept { return boxes_.empty(); }
  const Box& operator[](std::size_t i) const { return boxes_[i]; }
  auto begin() const noexcept { return boxes_.begin(); }
  auto end() const noexcept { return boxes_.end(); }

 private:
  friend BoxSet order_boxes(std::vector<Box> boxes, Dims dims);
  Dims dims_;
  std::vector<Box> boxes_;
};

enum class TrimapState : std::uint8_t { DefiniteBackground = 0, ProbableForeground = 1, Unknown = 2 };
using Trimap = Raster<TrimapState>;

/// Every numeric knob of the label synthesis pipeline.
struct WeakLabelConfig {
  double vote_fg_thresh = 0.70;
  double vote_bg_thresh = 0.20;
  int n_perturbations = 150;
  double jitter_frac = 0.05;
  double margin_min = 0.10;
  double margin_max = 0.60;
  double margin_default = 0.40;
  double inner_region_frac = 0.20;
  double outlier_iou_thresh = 0.50;
  int gmm_components = 5;
  int grabcut_iters = 5;
  std::uint64_t rng_seed = 0;
  int n_classes = kDefaultNumClasses;

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;
};

/// Clamps a box to [0,w]x[0,h]; throws DegenerateBox if nothing remains.
Box clip_box(const Box& box, Dims dims);

/// Validates, clips and sorts boxes into painting order.
BoxSet order_boxes(std::vector<Box> boxes, Dims dims);

/// Intersection-over-union of two boxes (0 when disjoint).
double box_iou(const Box& a, const Box& b) noexcept;

/// Tight bounding box of the foreground pixels; nullopt-like: area 0 when empty.
Box mask_bounds(const SegmentMask& mask) noexcept;

std::size_t count_foreground(const SegmentMask& mask) noexcept;

/// Filled box rectangle as a mask over `dims`.
SegmentMask box_mask(const Box& box, Dims dims);

/// Binary morphology with a (2r+1)x(2r+1) square; pixels outside the image
/// count as background.
SegmentMask dilate(const SegmentMask& mask, int radius);
SegmentMask erode(const SegmentMask& mask, int radius);

}  // namespace boxlabel
