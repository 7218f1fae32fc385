#pragma once

#include <cstdint>
#include <vector>

#include "boxlabel/core.hpp"

namespace boxlabel::grabcut {

enum class PairwiseSource { RgbContrast, BoundaryMap };

struct Params {
  PairwiseSource pairwise_source = PairwiseSource::RgbContrast;
  double lambda = 50.0;
  double gamma_boundary = 5.0;
  /// Outer context as a fraction of the box width/height on each side.
  double margin = 0.40;

  static Params grabcut_plus() {
    Params p;
    p.pairwise_source = PairwiseSource::BoundaryMap;
    return p;
  }
};

struct Pixel {
  int x = 0;
  int y = 0;
};

struct CropTrimap {
  Box crop;  // crop rectangle in image coordinates; class_id unused
  Trimap trimap;
};

/// Box expanded by round(margin * w|h) on each side, clipped to the image.
/// Box pixels are ProbableForeground, the surrounding ring DefiniteBackground.
CropTrimap init_trimap(const Box& box, double margin, Dims dims);

/// 1 / (2 * mean |z_p - z_q|^2) over all 8-neighbour pairs inside `crop`
/// (0 when the crop is flat).
double contrast_beta(const Image& image, const Box& crop);

/// Smoothness weight for adjacent pixels p, q (8-neighbourhood).
/// Throws MissingBoundaryMap in BoundaryMap mode without a map.
double pairwise_weight(Pixel p, Pixel q, const Image& image, const BoundaryMap* boundary, const Params& params,
                       double beta);

struct Result {
  SegmentMask mask;
  /// Energy after each min-cut (unaries of all crop pixels + cut pairwise).
  std::vector<double> energy;
  int iterations = 0;
  /// True when an iteration left no foreground and the box rectangle was
  /// returned instead.
  bool fell_back = false;
};

/// Iterated colour-model / min-cut segmentation of one box. `box_index`
/// selects the deterministic seed stream (cfg.rng_seed + box_index).
Result run_grabcut_detailed(const Image& image, const Box& box, const WeakLabelConfig& cfg, const Params& params,
                            const BoundaryMap* boundary, std::uint64_t box_index = 0);

SegmentMask run_grabcut(const Image& image, const Box& box, const WeakLabelConfig& cfg, const Params& params,
                        const BoundaryMap* boundary, std::uint64_t box_index = 0);

}  // namespace boxlabel::grabcut
