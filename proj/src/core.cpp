#include "boxlabel/core.hpp"

#include <algorithm>
#include <tuple>

namespace boxlabel {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownClassId: return "UnknownClassId";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingBoundaryMap: return "MissingBoundaryMap";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::BothEmpty: return "BothEmpty";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::MissingMask: return "MissingMask";
    case ErrorCode::SpecInfeasible: return "SpecInfeasible";
    case ErrorCode::ImageTooLarge: return "ImageTooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Image::Image(Dims dims, Rgb fill) : dims_(dims), pixels_(dims.pixel_count(), fill) {
  if (dims.width < 1 || dims.height < 1) throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
}

Image::Image(Dims dims, std::vector<Rgb> pixels) : dims_(dims), pixels_(std::move(pixels)) {
  if (dims.width < 1 || dims.height < 1) throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
  if (pixels_.size() != dims.pixel_count()) {
    throw Error(ErrorCode::DimensionMismatch, "pixel count does not match image dimensions");
  }
}

void WeakLabelConfig::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(0.0 < vote_bg_thresh && vote_bg_thresh < vote_fg_thresh && vote_fg_thresh <= 1.0)) {
    fail("vote thresholds must satisfy 0 < bg < fg <= 1");
  }
  if (!(0.0 <= jitter_frac && jitter_frac < 0.5)) fail("jitter_frac must be in [0, 0.5)");
  if (!(0.0 < margin_min && margin_min <= margin_default && margin_default <= margin_max)) {
    fail("margins must satisfy 0 < min <= default <= max");
  }
  if (!(0.0 < inner_region_frac && inner_region_frac <= 1.0)) fail("inner_region_frac must be in (0, 1]");
  if (!(0.0 <= outlier_iou_thresh && outlier_iou_thresh <= 1.0)) fail("outlier_iou_thresh must be in [0, 1]");
  if (n_perturbations < 1) fail("n_perturbations must be >= 1");
  if (gmm_components < 1) fail("gmm_components must be >= 1");
  if (grabcut_iters < 1) fail("grabcut_iters must be >= 1");
  if (n_classes < 1 || n_classes > 254) fail("n_classes must be in [1, 254]");
}

Box clip_box(const Box& box, Dims dims) {
  if (box.xmax <= box.xmin || box.ymax <= box.ymin) {
    throw Error(ErrorCode::DegenerateBox, "box has non-positive extent");
  }
  Box out = box;
  out.xmin = std::clamp(box.xmin, 0, dims.width);
  out.xmax = std::clamp(box.xmax, 0, dims.width);
  out.ymin = std::clamp(box.ymin, 0, dims.height);
  out.ymax = std::clamp(box.ymax, 0, dims.height);
  if (out.area() == 0) throw Error(ErrorCode::DegenerateBox, "box is empty after clipping to the image");
  return out;
}

BoxSet order_boxes(std::vector<Box> boxes, Dims dims) {
  for (auto& b : boxes) b = clip_box(b, dims);
  std::stable_sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) {
    if (a.area() != b.area()) return a.area() > b.area();
    return std::tie(a.ymin, a.xmin, a.class_id) < std::tie(b.ymin, b.xmin, b.class_id);
  });
  BoxSet set;
  set.dims_ = dims;
  set.boxes_ = std::move(boxes);
  return set;
}

double box_iou(const Box& a, const Box& b) noexcept {
  const int ix = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const int iy = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (ix <= 0 || iy <= 0) return 0.0;
  const double inter = static_cast<double>(ix) * iy;
  const double uni = static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Box mask_bounds(const SegmentMask& mask) noexcept {
  Box b{0, mask.width(), mask.height(), 0, 0};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      b.xmin = std::min(b.xmin, x);
      b.ymin = std::min(b.ymin, y);
      b.xmax = std::max(b.xmax, x + 1);
      b.ymax = std::max(b.ymax, y + 1);
    }
  }
  if (b.xmax <= b.xmin) return Box{0, 0, 0, 0, 0};
  return b;
}

std::size_t count_foreground(const SegmentMask& mask) noexcept {
  return static_cast<std::size_t>(std::count_if(mask.values().begin(), mask.values().end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

SegmentMask box_mask(const Box& box, Dims dims) {
  SegmentMask m(dims, 0);
  const Box c = clip_box(box, dims);
  for (int y = c.ymin; y < c.ymax; ++y)
    for (int x = c.xmin; x < c.xmax; ++x) m.at(x, y) = 1;
  return m;
}

namespace {

SegmentMask morph(const SegmentMask& m, int radius, bool grow) {
  if (radius < 0) throw Error(ErrorCode::InvalidArgument, "morphology radius must be >= 0");
  SegmentMask out(m.dims(), 0);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool any = false, all = true;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const int qx = x + dx, qy = y + dy;
          const bool v = m.dims().contains(qx, qy) && m.at(qx, qy);
          any = any || v;
          all = all && v;
        }
      }
      out.at(x, y) = (grow ? any : all) ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

SegmentMask dilate(const SegmentMask& mask, int radius) { return morph(mask, radius, true); }

SegmentMask erode(const SegmentMask& mask, int radius) { return morph(mask, radius, false); }

}  // namespace boxlabel
