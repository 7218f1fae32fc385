#include "boxlabel/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace boxlabel::metrics {
namespace {

std::string threshold_key(double t) {
  std::ostringstream s;
  s << t;
  return s.str();
}

// IoU that treats two empty masks as no overlap, for matching loops.
double overlap(const SegmentMask& a, const SegmentMask& b) {
  if (a.dims() != b.dims()) throw Error(ErrorCode::DimensionMismatch, "instance masks differ in size");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool pa = a[i] != 0, pb = b[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

void require_masks(std::span<const io::Detection> dets) {
  for (const auto& d : dets)
    if (!d.mask) throw Error(ErrorCode::MissingMask, "detection without a mask in instance evaluation");
}

}  // namespace

double mask_iou(const SegmentMask& a, const SegmentMask& b) {
  if (a.dims() != b.dims()) throw Error(ErrorCode::DimensionMismatch, "masks differ in size");
  if (count_foreground(a) == 0 && count_foreground(b) == 0) throw Error(ErrorCode::BothEmpty, "both masks are empty");
  return overlap(a, b);
}

SemanticReport semantic_eval(std::span<const LabelMap> preds, std::span<const LabelMap> gts, int n_classes) {
  if (n_classes < 1 || n_classes > 255) throw Error(ErrorCode::InvalidArgument, "class count must be in [1, 255]");
  if (preds.size() != gts.size()) throw Error(ErrorCode::CountMismatch, "prediction and ground-truth counts differ");
  SemanticReport r;
  r.n_classes = n_classes;
  const auto nc = static_cast<std::size_t>(n_classes);
  r.confusion.assign(nc, std::vector<std::uint64_t>(nc, 0));
  std::uint64_t scored = 0;
  for (std::size_t k = 0; k < preds.size(); ++k) {
    if (preds[k].dims() != gts[k].dims()) {
      throw Error(ErrorCode::DimensionMismatch, "prediction " + std::to_string(k) + " differs in size from its ground truth");
    }
    for (std::size_t i = 0; i < gts[k].size(); ++i) {
      const int g = gts[k][i], p = preds[k][i];
      if (g == kIgnore || p == kIgnore) continue;
      if (g >= n_classes || p >= n_classes) {
        throw Error(ErrorCode::InvalidArgument, "label " + std::to_string(std::max(g, p)) + " outside [0, " +
                                                    std::to_string(n_classes) + ")");
      }
      ++r.confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
      ++scored;
    }
  }
  if (scored == 0) throw Error(ErrorCode::EmptyDataset, "no scored pixels");
  r.per_class_iou.assign(nc, std::nullopt);
  // extended precision so small rational cases round to the nearest double
  long double sum = 0.0L;
  int defined = 0;
  for (std::size_t c = 0; c < nc; ++c) {
    std::uint64_t gt_total = 0, pred_total = 0;
    for (std::size_t j = 0; j < nc; ++j) {
      gt_total += r.confusion[c][j];
      pred_total += r.confusion[j][c];
    }
    const std::uint64_t tp = r.confusion[c][c];
    const std::uint64_t denom = gt_total + pred_total - tp;
    if (denom == 0) continue;
    const long double iou = static_cast<long double>(tp) / static_cast<long double>(denom);
    r.per_class_iou[c] = static_cast<double>(iou);
    sum += iou;
    ++defined;
  }
  r.miou = static_cast<double>(sum / defined);
  return r;
}

std::map<int, double> instance_ap(std::span<const io::Detection> dets, std::span<const io::GtInstance> gts,
                                  double iou_thresh) {
  require_masks(dets);
  std::map<int, double> out;
  std::map<int, std::vector<std::size_t>> gt_by_class;
  for (std::size_t g = 0; g < gts.size(); ++g) gt_by_class[gts[g].class_id].push_back(g);

  for (const auto& [cls, gt_ids] : gt_by_class) {
    std::vector<std::size_t> order;
    for (std::size_t d = 0; d < dets.size(); ++d)
      if (dets[d].class_id == cls) order.push_back(d);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

    std::vector<bool> matched(gts.size(), false);
    std::vector<double> precision, recall;
    std::size_t tp = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      const io::Detection& d = dets[order[rank]];
      double best = -1.0;
      std::size_t best_gt = 0;
      for (std::size_t g : gt_ids) {
        if (matched[g] || gts[g].image != d.image) continue;
        const double iou = overlap(*d.mask, gts[g].mask);
        if (iou > best) {
          best = iou;
          best_gt = g;
        }
      }
      if (best >= iou_thresh) {
        matched[best_gt] = true;
        ++tp;
      }
      precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
      recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_ids.size()));
    }
    // area under the monotone envelope of the precision-recall curve
    for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t i = 0; i < precision.size(); ++i) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
    out[cls] = ap;
  }
  return out;
}

double mean_ap(const std::map<int, double>& per_class) {
  if (per_class.empty()) return 0.0;
  double s = 0.0;
  for (const auto& [cls, ap] : per_class) s += ap;
  return s / static_cast<double>(per_class.size());
}

double abo(std::span<const io::Detection> dets, std::span<const io::GtInstance> gts) {
  require_masks(dets);
  if (gts.empty()) throw Error(ErrorCode::EmptyDataset, "no ground-truth instances");
  std::map<int, std::pair<double, int>> per_class;
  for (const auto& g : gts) {
    double best = 0.0;
    for (const auto& d : dets)
      if (d.class_id == g.class_id && d.image == g.image) best = std::max(best, overlap(*d.mask, g.mask));
    auto& slot = per_class[g.class_id];
    slot.first += best;
    slot.second += 1;
  }
  double s = 0.0;
  for (const auto& [cls, acc] : per_class) s += acc.first / acc.second;
  return s / static_cast<double>(per_class.size());
}

InstanceReport instance_eval(std::span<const io::Detection> dets, std::span<const io::GtInstance> gts,
                             const std::vector<double>& thresholds) {
  InstanceReport r;
  for (double t : thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidArgument, "IoU thresholds must be in (0, 1]");
    r.ap[t] = instance_ap(dets, gts, t);
    r.map_at[t] = mean_ap(r.ap[t]);
  }
  r.abo = abo(dets, gts);
  return r;
}

std::string to_json(const SemanticReport& report) {
  nlohmann::ordered_json doc;
  doc["miou"] = report.miou;
  doc["per_class"] = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < report.per_class_iou.size(); ++c)
    if (report.per_class_iou[c]) doc["per_class"][std::to_string(c)] = *report.per_class_iou[c];
  return doc.dump(2);
}

std::string to_json(const InstanceReport& report) {
  nlohmann::ordered_json doc;
  for (const auto& [t, m] : report.map_at) doc["mAP@" + threshold_key(t)] = m;
  doc["ABO"] = report.abo;
  doc["per_class"] = nlohmann::ordered_json::object();
  for (const auto& [t, per] : report.ap) {
    auto& slot = doc["per_class"][threshold_key(t)];
    slot = nlohmann::ordered_json::object();
    for (const auto& [cls, ap] : per) slot[std::to_string(cls)] = ap;
  }
  return doc.dump(2);
}

}  // namespace boxlabel::metrics
