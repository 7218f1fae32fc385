#include "boxlabel/denoise.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "boxlabel/dataio.hpp"
#include "boxlabel/metrics.hpp"
#include "boxlabel/parallel.hpp"
#include "boxlabel/rng.hpp"

namespace boxlabel::denoise {
namespace {

void check_same_dims(Dims a, Dims b, const char* what) {
  if (a != b) throw Error(ErrorCode::DimensionMismatch, std::string(what) + " size differs");
}

bool region_matches(const LabelMap& a, const LabelMap& b, const Box& box) {
  for (int y = box.ymin; y < box.ymax; ++y)
    for (int x = box.xmin; x < box.xmax; ++x)
      if (a.at(x, y) != b.at(x, y)) return false;
  return true;
}

double segment_box_iou(const LabelMap& labels, const Box& box) {
  const auto cls = static_cast<std::uint8_t>(box.class_id);
  std::size_t inside = 0;
  for (int y = box.ymin; y < box.ymax; ++y)
    for (int x = box.xmin; x < box.xmax; ++x) inside += labels.at(x, y) == cls;
  // the segment lies inside the box, so |seg & box| = |seg| and |seg | box| = |box|
  return static_cast<double>(inside) / static_cast<double>(box.area());
}

}  // namespace

LabelMap enforce_boxes(const LabelMap& pred, const BoxSet& boxes) {
  check_same_dims(pred.dims(), boxes.image_dims(), "prediction and box set");
  // allowed[i] is a bitset of the classes whose boxes cover pixel i
  std::vector<std::array<std::uint64_t, 4>> allowed(pred.size(), std::array<std::uint64_t, 4>{});
  std::vector<bool> covered(pred.size(), false);
  for (const Box& b : boxes) {
    for (int y = b.ymin; y < b.ymax; ++y) {
      for (int x = b.xmin; x < b.xmax; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * pred.width() + x;
        covered[i] = true;
        allowed[i][static_cast<std::size_t>(b.class_id) / 64] |= std::uint64_t{1} << (b.class_id % 64);
      }
    }
  }
  LabelMap out = pred;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int v = out[i];
    if (!covered[i]) {
      out[i] = kBackground;
    } else if (v != kBackground && v != kIgnore && ((allowed[i][static_cast<std::size_t>(v) / 64] >> (v % 64)) & 1) == 0) {
      out[i] = kBackground;
    }
  }
  return out;
}

LabelMap reset_outliers(const LabelMap& cur, const BoxSet& boxes, const LabelMap& initial, double thresh) {
  check_same_dims(cur.dims(), boxes.image_dims(), "labels and box set");
  check_same_dims(initial.dims(), cur.dims(), "initial labels");
  LabelMap out = cur;
  // Every reset copies from `initial`, so the set of pixels agreeing with it
  // only grows and the loop terminates.
  for (bool changed = true; changed;) {
    changed = false;
    for (const Box& b : boxes) {
      if (segment_box_iou(out, b) >= thresh || region_matches(out, initial, b)) continue;
      for (int y = b.ymin; y < b.ymax; ++y)
        for (int x = b.xmin; x < b.xmax; ++x) out.at(x, y) = initial.at(x, y);
      changed = true;
    }
  }
  return out;
}

LabelMap crf_stage(const LabelMap& labels, const Image& image, const crf::Params& params, int n_labels) {
  check_same_dims(labels.dims(), image.dims(), "labels and image");
  const crf::ProbabilityMap unaries = crf::labelmap_to_unaries(labels, n_labels, params.unary_confidence);
  const crf::MeanFieldResult mf = crf::meanfield(unaries, image, params);

  std::vector<int> present{0};
  std::vector<bool> seen(static_cast<std::size_t>(n_labels), false);
  seen[0] = true;
  for (std::uint8_t v : labels.values()) {
    if (v != kIgnore && !seen[v]) {
      seen[v] = true;
      present.push_back(v);
    }
  }
  std::sort(present.begin(), present.end());

  LabelMap out(labels.dims(), kBackground);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int best = present[0];
    double best_q = mf.q.at(i, best), second_q = -1.0;
    for (std::size_t k = 1; k < present.size(); ++k) {
      const double q = mf.q.at(i, present[k]);
      if (q > best_q) {
        second_q = best_q;
        best_q = q;
        best = present[k];
      } else {
        second_q = std::max(second_q, q);
      }
    }
    const bool tied = present.size() > 1 && best_q - second_q <= 1e-12;
    out[i] = labels[i] == kIgnore && tied ? kIgnore : static_cast<std::uint8_t>(best);
  }
  return out;
}

Stages Stages::parse(const std::string& list) {
  Stages s{false, false, false};
  std::stringstream in(list);
  std::string item;
  bool any = false;
  while (std::getline(in, item, ',')) {
    if (item == "1") {
      s.enforce = true;
    } else if (item == "2") {
      s.reset = true;
    } else if (item == "3") {
      s.crf = true;
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown stage '" + item + "' (expected 1, 2 or 3)");
    }
    any = true;
  }
  if (!any) throw Error(ErrorCode::InvalidArgument, "stage list is empty");
  return s;
}

LabelMap run_round(const LabelMap& pred, const BoxSet& boxes, const LabelMap& initial, const Image& image,
                   const WeakLabelConfig& cfg, const crf::Params& crf_params, const Stages& stages) {
  check_same_dims(pred.dims(), image.dims(), "prediction and image");
  check_same_dims(initial.dims(), image.dims(), "initial labels and image");
  LabelMap labels = pred;
  if (stages.enforce) labels = enforce_boxes(labels, boxes);
  if (stages.reset) labels = reset_outliers(labels, boxes, initial, cfg.outlier_iou_thresh);
  if (stages.crf) {
    labels = crf_stage(labels, image, crf_params, cfg.n_classes + 1);
    if (stages.enforce) labels = enforce_boxes(labels, boxes);
  }
  return labels;
}

SyntheticPredictor::SyntheticPredictor(std::vector<LabelMap> ground_truth, double noise, std::uint64_t seed,
                                       int n_classes)
    : gt_(std::move(ground_truth)), noise_(noise), seed_(seed), n_classes_(n_classes) {
  if (!(noise >= 0.0 && noise <= 1.0)) throw Error(ErrorCode::InvalidArgument, "predictor noise must be in [0, 1]");
}

LabelMap SyntheticPredictor::predict(const PredictorInput& input) {
  if (input.image_index >= gt_.size()) throw Error(ErrorCode::InvalidArgument, "no ground truth for image");
  const LabelMap& gt = gt_[input.image_index];
  if (noise_ == 0.0) return gt;
  Rng rng(derive_seed({seed_, input.image_index, static_cast<std::uint64_t>(input.round)}));
  const int radius = static_cast<int>(std::lround(4.0 * noise_));

  LabelMap out(gt.dims(), kBackground);
  for (int cls = 1; cls <= n_classes_; ++cls) {
    SegmentMask m(gt.dims(), 0);
    bool any = false;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (gt[i] == cls) {
        m[i] = 1;
        any = true;
      }
    }
    if (!any) continue;
    const SegmentMask moved = rng.below(2) ? dilate(m, radius) : erode(m, radius);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (moved[i]) out[i] = static_cast<std::uint8_t>(cls);
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    if (rng.uniform() < noise_) out[i] = static_cast<std::uint8_t>(rng.uniform_int(0, n_classes_));
  return out;
}

std::vector<RoundState> recursive_harness(const std::vector<HarnessImage>& dataset, Predictor& predictor, int rounds,
                                          const WeakLabelConfig& cfg, const crf::Params& crf_params,
                                          const Stages& stages, int threads) {
  if (rounds < 1) throw Error(ErrorCode::InvalidArgument, "at least one round is required");
  const bool have_gt = !dataset.empty() && std::all_of(dataset.begin(), dataset.end(),
                                                       [](const HarnessImage& h) { return h.gt.has_value(); });
  std::vector<LabelMap> gts;
  if (have_gt)
    for (const auto& h : dataset) gts.push_back(*h.gt);

  auto finish = [&](RoundState& st, const std::vector<LabelMap>* previous) {
    st.stats.class_pixel_counts.assign(256, 0);
    std::uint64_t total = 0, changed = 0;
    for (std::size_t k = 0; k < st.labels.size(); ++k) {
      for (std::size_t i = 0; i < st.labels[k].size(); ++i) {
        ++st.stats.class_pixel_counts[st.labels[k][i]];
        ++total;
        if (previous != nullptr) changed += st.labels[k][i] != (*previous)[k][i];
      }
    }
    st.stats.changed_pixel_fraction = total == 0 ? 0.0 : static_cast<double>(changed) / static_cast<double>(total);
    if (have_gt) st.stats.miou = metrics::semantic_eval(st.labels, gts, cfg.n_classes + 1).miou;
  };

  std::vector<RoundState> out;
  RoundState zero;
  for (const auto& h : dataset) zero.labels.push_back(h.initial);
  finish(zero, nullptr);
  out.push_back(std::move(zero));

  for (int r = 1; r <= rounds; ++r) {
    RoundState st;
    st.round_index = r;
    st.labels.resize(dataset.size());
    const std::vector<LabelMap>& prev = out.back().labels;
    parallel_for(dataset.size(), threads, [&](std::size_t k) {
      const HarnessImage& h = dataset[k];
      PredictorInput in{k, r, &h.image, &h.boxes, &prev[k]};
      const LabelMap pred = predictor.predict(in);
      st.labels[k] = run_round(pred, h.boxes, h.initial, h.image, cfg, crf_params, stages);
    });
    finish(st, &prev);
    out.push_back(std::move(st));
  }
  return out;
}

void write_round(const std::filesystem::path& dir, const RoundState& state, const std::vector<HarnessImage>& dataset) {
  if (state.labels.size() != dataset.size()) throw Error(ErrorCode::CountMismatch, "round labels do not match dataset");
  const auto round_dir = dir / ("round_" + std::to_string(state.round_index));
  std::filesystem::create_directories(round_dir);
  for (std::size_t k = 0; k < dataset.size(); ++k) io::write_labelmap(state.labels[k], round_dir / (dataset[k].stem + ".png"));
  nlohmann::ordered_json doc;
  doc["round"] = state.round_index;
  doc["changed_pixel_fraction"] = state.stats.changed_pixel_fraction;
  doc["class_pixel_counts"] = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < state.stats.class_pixel_counts.size(); ++c)
    if (state.stats.class_pixel_counts[c] > 0) doc["class_pixel_counts"][std::to_string(c)] = state.stats.class_pixel_counts[c];
  if (state.stats.miou) doc["miou"] = *state.stats.miou;
  std::ofstream out(round_dir / "stats.json");
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + (round_dir / "stats.json").string());
  out << doc.dump(2) << '\n';
}

}  // namespace boxlabel::denoise
