#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "boxlabel/core.hpp"
#include "boxlabel/grabcut.hpp"

namespace boxlabel::weak {

enum class SegState : std::uint8_t { Background = 0, Foreground = 1, Ignore = 2 };

/// Per-box ternary segment, defined over the box region only.
struct TriSegment {
  Box box;
  Raster<SegState> states;  // box.width() x box.height()

  TriSegment() = default;
  TriSegment(const Box& b, SegState fill);

  SegState at_image(int x, int y) const { return states.at(x - box.xmin, y - box.ymin); }
  SegState& at_image(int x, int y) { return states.at(x - box.xmin, y - box.ymin); }
};

/// Every box pixel gets the box class, smaller boxes on top, the rest 0.
LabelMap rasterize_box_labels(const BoxSet& boxes);

/// Centred rectangle with the box's aspect ratio whose area is closest to
/// `inner_frac` of the box area (at least 1x1).
Box inner_box(const Box& box, double inner_frac);

/// Inner rectangle gets the class, the rest of each box is ignore (255).
LabelMap rasterize_box_inner(const BoxSet& boxes, double inner_frac);

/// FG when fraction >= vote_fg_thresh, BG when below vote_bg_thresh, else Ignore.
SegState classify_vote(double fraction, const WeakLabelConfig& cfg);
SegState classify_votes(int fg_votes, int n_runs, const WeakLabelConfig& cfg);

/// The k-th jittered GrabCut+ run for a box.
struct Perturbation {
  Box box;
  double margin = 0.0;
  std::uint64_t seed = 0;  // rng_seed handed to the GrabCut run
};

/// Per-coordinate jitter of uniform(-jitter_frac, jitter_frac) * (w or h),
/// margin uniform(margin_min, margin_max), from a stream seeded by
/// (cfg.rng_seed, box_index, k). Collapsed boxes are re-clipped to >= 1 px.
Perturbation perturbation(const Box& box, Dims dims, const WeakLabelConfig& cfg, std::uint64_t box_index,
                          std::uint64_t k);

/// Foreground vote counts over the original box (row-major, box-sized).
struct VoteCounts {
  int runs = 0;
  std::vector<int> fg;
};

/// cfg.n_perturbations jittered GrabCut runs voted per pixel inside the
/// original box.
TriSegment grabcut_plus_i(const Image& image, const Box& box, const WeakLabelConfig& cfg,
                          const grabcut::Params& params, const BoundaryMap* boundary, std::uint64_t box_index = 0,
                          VoteCounts* votes = nullptr);

/// Index of the proposal whose tight bounds overlap `box` best (box IoU);
/// ties go to the lowest index; nullopt for an empty set or zero overlap.
std::optional<std::size_t> pick_best_proposal(const Box& box, std::span<const SegmentMask> proposals);

/// FG where both masks agree inside the box, Ignore on the rest of the box.
/// Without a proposal the GrabCut mask is used as FG and the remainder BG.
TriSegment intersect_mg(const SegmentMask* proposal, const SegmentMask& grabcut_mask, const Box& box);

/// FG where the mask is set inside the box, BG elsewhere in the box.
TriSegment segment_from_mask(const SegmentMask& mask, const Box& box);

/// Paint segments back-to-front onto an all-background map: FG -> class,
/// Ignore -> 255, BG leaves the pixel alone. segments[i] belongs to boxes[i].
LabelMap compose_labelmap(std::span<const TriSegment> segments, const BoxSet& boxes);
LabelMap compose_labelmap(std::span<const SegmentMask> masks, const BoxSet& boxes);

enum class InstanceShape { Rectangle, Ellipse };

/// Training-free instance mask for one box.
SegmentMask instance_baseline(const Box& box, InstanceShape shape, Dims dims);

}  // namespace boxlabel::weak
