#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boxlabel/core.hpp"
#include "boxlabel/dataio.hpp"

namespace boxlabel::metrics {

/// |a & b| / |a | b|. Throws BothEmpty when neither mask has foreground and
/// DimensionMismatch when sizes differ.
double mask_iou(const SegmentMask& a, const SegmentMask& b);

struct SemanticReport {
  int n_classes = 0;  // including background
  /// confusion[gt][pred]; pixels where either side is 255 are not counted.
  std::vector<std::vector<std::uint64_t>> confusion;
  /// nullopt for classes absent from both ground truth and prediction.
  std::vector<std::optional<double>> per_class_iou;
  double miou = 0.0;
};

/// `n_classes` counts background, so Pascal VOC uses 21. Throws
/// DimensionMismatch, EmptyDataset (no scored pixels) and InvalidArgument
/// for labels outside [0, n_classes) other than 255.
SemanticReport semantic_eval(std::span<const LabelMap> preds, std::span<const LabelMap> gts, int n_classes);

/// Per-class all-point average precision at one mask-IoU threshold, for
/// every class with at least one ground-truth instance. Detections are
/// matched greedily by descending score to the unmatched ground truth of the
/// same class and image with the highest IoU. Throws MissingMask.
std::map<int, double> instance_ap(std::span<const io::Detection> dets, std::span<const io::GtInstance> gts,
                                  double iou_thresh);

/// Mean of the per-class values (0 for an empty map).
double mean_ap(const std::map<int, double>& per_class);

/// Average best overlap: per class, the mean over ground-truth instances of
/// the best IoU with any same-class detection mask in the same image, then
/// averaged over classes. Throws EmptyDataset without ground truth.
double abo(std::span<const io::Detection> dets, std::span<const io::GtInstance> gts);

struct InstanceReport {
  std::map<double, std::map<int, double>> ap;  // threshold -> class -> AP
  std::map<double, double> map_at;             // threshold -> mAP
  double abo = 0.0;
};

InstanceReport instance_eval(std::span<const io::Detection> dets, std::span<const io::GtInstance> gts,
                             const std::vector<double>& thresholds);

/// {"miou":..., "per_class":{"<class>":iou,...}}
std::string to_json(const SemanticReport& report);
/// {"mAP@<t>":..., ..., "ABO":..., "per_class":{"<t>":{"<class>":ap}}}
std::string to_json(const InstanceReport& report);

}  // namespace boxlabel::metrics
