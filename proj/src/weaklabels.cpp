#include "boxlabel/weaklabels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "boxlabel/log.hpp"
#include "boxlabel/rng.hpp"

namespace boxlabel::weak {
namespace {

void check_dims(const SegmentMask& mask, Dims dims, const char* what) {
  if (mask.dims() != dims) throw Error(ErrorCode::DimensionMismatch, std::string(what) + " size differs from the image");
}

void require_inside(const Box& box, Dims dims) {
  if (box.area() == 0) throw Error(ErrorCode::DegenerateBox, "box has non-positive extent");
  if (clip_box(box, dims) != box) throw Error(ErrorCode::DegenerateBox, "box extends past the image");
}

}  // namespace

TriSegment::TriSegment(const Box& b, SegState fill) : box(b), states(Dims{b.width(), b.height()}, fill) {}

LabelMap rasterize_box_labels(const BoxSet& boxes) {
  LabelMap out(boxes.image_dims(), kBackground);
  for (const Box& b : boxes)
    for (int y = b.ymin; y < b.ymax; ++y)
      for (int x = b.xmin; x < b.xmax; ++x) out.at(x, y) = static_cast<std::uint8_t>(b.class_id);
  return out;
}

Box inner_box(const Box& box, double inner_frac) {
  if (!(inner_frac > 0.0 && inner_frac <= 1.0)) throw Error(ErrorCode::InvalidArgument, "inner_frac must be in (0, 1]");
  if (box.area() == 0) throw Error(ErrorCode::DegenerateBox, "box has non-positive extent");
  const int w = box.width(), h = box.height();
  const double scale = std::sqrt(inner_frac);
  const double target = inner_frac * static_cast<double>(box.area());
  const double aspect = std::log(static_cast<double>(w) / h);
  // Plain rounding of both sides can miss the target area by several
  // percent on small boxes, so search the neighbouring integer sizes.
  int best_w = 1, best_h = 1;
  double best_area_err = std::numeric_limits<double>::infinity(), best_aspect_err = best_area_err;
  const int w0 = static_cast<int>(std::floor(w * scale)), h0 = static_cast<int>(std::floor(h * scale));
  for (int cw = w0 - 1; cw <= w0 + 2; ++cw) {
    for (int ch = h0 - 1; ch <= h0 + 2; ++ch) {
      if (cw < 1 || ch < 1 || cw > w || ch > h) continue;
      const double area_err = std::abs(static_cast<double>(cw) * ch - target);
      const double aspect_err = std::abs(std::log(static_cast<double>(cw) / ch) - aspect);
      const bool better = area_err < best_area_err - 1e-9 ||
                          (area_err <= best_area_err + 1e-9 &&
                           (aspect_err < best_aspect_err - 1e-12 ||
                            (aspect_err <= best_aspect_err + 1e-12 && cw > best_w)));
      if (better) {
        best_w = cw;
        best_h = ch;
        best_area_err = area_err;
        best_aspect_err = aspect_err;
      }
    }
  }
  const int x0 = box.xmin + (w - best_w) / 2, y0 = box.ymin + (h - best_h) / 2;
  return Box{box.class_id, x0, y0, x0 + best_w, y0 + best_h};
}

LabelMap rasterize_box_inner(const BoxSet& boxes, double inner_frac) {
  std::vector<TriSegment> segs;
  for (const Box& b : boxes) {
    TriSegment s(b, SegState::Ignore);
    const Box inner = inner_box(b, inner_frac);
    for (int y = inner.ymin; y < inner.ymax; ++y)
      for (int x = inner.xmin; x < inner.xmax; ++x) s.at_image(x, y) = SegState::Foreground;
    segs.push_back(std::move(s));
  }
  return compose_labelmap(segs, boxes);
}

SegState classify_vote(double fraction, const WeakLabelConfig& cfg) {
  if (fraction >= cfg.vote_fg_thresh) return SegState::Foreground;
  if (fraction < cfg.vote_bg_thresh) return SegState::Background;
  return SegState::Ignore;
}

SegState classify_votes(int fg_votes, int n_runs, const WeakLabelConfig& cfg) {
  if (n_runs < 1 || fg_votes < 0 || fg_votes > n_runs) throw Error(ErrorCode::InvalidArgument, "invalid vote counts");
  return classify_vote(static_cast<double>(fg_votes) / static_cast<double>(n_runs), cfg);
}

Perturbation perturbation(const Box& box, Dims dims, const WeakLabelConfig& cfg, std::uint64_t box_index,
                          std::uint64_t k) {
  Rng rng(derive_seed({cfg.rng_seed, box_index, k}));
  const double w = box.width(), h = box.height();
  auto jitter = [&](double extent) {
    return static_cast<int>(std::lround(rng.uniform(-cfg.jitter_frac, cfg.jitter_frac) * extent));
  };
  Perturbation p;
  p.box = box;
  p.box.xmin += jitter(w);
  p.box.ymin += jitter(h);
  p.box.xmax += jitter(w);
  p.box.ymax += jitter(h);
  p.margin = rng.uniform(cfg.margin_min, cfg.margin_max);
  p.seed = rng.next_u64();
  Box& b = p.box;
  b.xmin = std::clamp(b.xmin, 0, dims.width - 1);
  b.ymin = std::clamp(b.ymin, 0, dims.height - 1);
  b.xmax = std::clamp(b.xmax, b.xmin + 1, dims.width);
  b.ymax = std::clamp(b.ymax, b.ymin + 1, dims.height);
  return p;
}

TriSegment grabcut_plus_i(const Image& image, const Box& box, const WeakLabelConfig& cfg,
                          const grabcut::Params& params, const BoundaryMap* boundary, std::uint64_t box_index,
                          VoteCounts* votes) {
  cfg.validate();
  require_inside(box, image.dims());
  const int n = cfg.n_perturbations;
  std::vector<int> fg(static_cast<std::size_t>(box.area()), 0);
  for (int k = 0; k < n; ++k) {
    const Perturbation p = perturbation(box, image.dims(), cfg, box_index, static_cast<std::uint64_t>(k));
    WeakLabelConfig run_cfg = cfg;
    run_cfg.rng_seed = p.seed;
    grabcut::Params run_params = params;
    run_params.margin = p.margin;
    const SegmentMask m = grabcut::run_grabcut(image, p.box, run_cfg, run_params, boundary, 0);
    std::size_t i = 0;
    for (int y = box.ymin; y < box.ymax; ++y)
      for (int x = box.xmin; x < box.xmax; ++x, ++i) fg[i] += m.at(x, y) ? 1 : 0;
  }
  TriSegment seg(box, SegState::Background);
  for (std::size_t i = 0; i < fg.size(); ++i) seg.states[i] = classify_votes(fg[i], n, cfg);
  if (votes != nullptr) *votes = VoteCounts{n, std::move(fg)};
  return seg;
}

std::optional<std::size_t> pick_best_proposal(const Box& box, std::span<const SegmentMask> proposals) {
  std::optional<std::size_t> best;
  double best_iou = 0.0;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const Box bounds = mask_bounds(proposals[i]);
    if (bounds.area() == 0) continue;
    const double iou = box_iou(bounds, box);
    if (iou > best_iou) {
      best_iou = iou;
      best = i;
    }
  }
  return best;
}

TriSegment segment_from_mask(const SegmentMask& mask, const Box& box) {
  require_inside(box, mask.dims());
  TriSegment seg(box, SegState::Background);
  for (int y = box.ymin; y < box.ymax; ++y)
    for (int x = box.xmin; x < box.xmax; ++x)
      if (mask.at(x, y)) seg.at_image(x, y) = SegState::Foreground;
  return seg;
}

TriSegment intersect_mg(const SegmentMask* proposal, const SegmentMask& grabcut_mask, const Box& box) {
  if (proposal == nullptr) {
    log_warning("no matching proposal for box; using the GrabCut+ segment alone");
    return segment_from_mask(grabcut_mask, box);
  }
  check_dims(*proposal, grabcut_mask.dims(), "proposal mask");
  require_inside(box, grabcut_mask.dims());
  TriSegment seg(box, SegState::Ignore);
  for (int y = box.ymin; y < box.ymax; ++y)
    for (int x = box.xmin; x < box.xmax; ++x)
      if (proposal->at(x, y) && grabcut_mask.at(x, y)) seg.at_image(x, y) = SegState::Foreground;
  return seg;
}

LabelMap compose_labelmap(std::span<const TriSegment> segments, const BoxSet& boxes) {
  if (segments.size() != boxes.size()) {
    throw Error(ErrorCode::CountMismatch, std::to_string(segments.size()) + " segments for " +
                                              std::to_string(boxes.size()) + " boxes");
  }
  LabelMap out(boxes.image_dims(), kBackground);
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    const TriSegment& s = segments[k];
    if (s.box.xmin != boxes[k].xmin || s.box.ymin != boxes[k].ymin || s.box.xmax != boxes[k].xmax ||
        s.box.ymax != boxes[k].ymax) {
      throw Error(ErrorCode::DimensionMismatch, "segment " + std::to_string(k) + " does not cover its box");
    }
    const auto cls = static_cast<std::uint8_t>(boxes[k].class_id);
    for (int y = s.box.ymin; y < s.box.ymax; ++y) {
      for (int x = s.box.xmin; x < s.box.xmax; ++x) {
        switch (s.at_image(x, y)) {
          case SegState::Foreground: out.at(x, y) = cls; break;
          case SegState::Ignore: out.at(x, y) = kIgnore; break;
          case SegState::Background: break;
        }
      }
    }
  }
  return out;
}

LabelMap compose_labelmap(std::span<const SegmentMask> masks, const BoxSet& boxes) {
  if (masks.size() != boxes.size()) {
    throw Error(ErrorCode::CountMismatch, std::to_string(masks.size()) + " masks for " +
                                              std::to_string(boxes.size()) + " boxes");
  }
  std::vector<TriSegment> segs;
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    check_dims(masks[k], boxes.image_dims(), "segment mask");
    segs.push_back(segment_from_mask(masks[k], boxes[k]));
  }
  return compose_labelmap(segs, boxes);
}

SegmentMask instance_baseline(const Box& box, InstanceShape shape, Dims dims) {
  require_inside(box, dims);
  if (shape == InstanceShape::Rectangle) return box_mask(box, dims);
  SegmentMask m(dims, 0);
  const double cx = (box.xmin + box.xmax) / 2.0, cy = (box.ymin + box.ymax) / 2.0;
  const double a = box.width() / 2.0, b = box.height() / 2.0;
  for (int y = box.ymin; y < box.ymax; ++y) {
    for (int x = box.xmin; x < box.xmax; ++x) {
      const double u = (x + 0.5 - cx) / a, v = (y + 0.5 - cy) / b;
      if (u * u + v * v <= 1.0) m.at(x, y) = 1;
    }
  }
  return m;
}

}  // namespace boxlabel::weak
