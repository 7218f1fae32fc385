#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "boxlabel/core.hpp"
#include "boxlabel/densecrf.hpp"

namespace boxlabel::denoise {

/// Pixels outside every box become background; pixels inside boxes whose
/// label is not the class of a covering box become background. Ignore
/// pixels inside boxes are kept.
LabelMap enforce_boxes(const LabelMap& pred, const BoxSet& boxes);

/// For each box (back-to-front) whose segment, the pixels inside it carrying
/// its class, has IoU with the box below `thresh`, the box region is copied
/// from `initial`. Passes repeat until nothing changes; a box whose region
/// already equals `initial` is left alone.
LabelMap reset_outliers(const LabelMap& cur, const BoxSet& boxes, const LabelMap& initial, double thresh);

/// Dense CRF over `n_labels` classes (background included) on the hard
/// labels. The argmax is restricted to classes present in the input plus
/// background; ignore pixels stay ignore when that argmax is tied.
LabelMap crf_stage(const LabelMap& labels, const Image& image, const crf::Params& params, int n_labels);

struct Stages {
  bool enforce = true;
  bool reset = true;
  bool crf = true;

  /// Parses a comma list such as "1,2,3"; throws InvalidArgument.
  static Stages parse(const std::string& list);
};

/// Enabled stages in the order enforce -> reset -> CRF, followed by a second
/// enforce when both the CRF and enforce stages ran.
LabelMap run_round(const LabelMap& pred, const BoxSet& boxes, const LabelMap& initial, const Image& image,
                   const WeakLabelConfig& cfg, const crf::Params& crf_params, const Stages& stages = {});

struct PredictorInput {
  std::size_t image_index = 0;
  int round = 0;
  const Image* image = nullptr;
  const BoxSet* boxes = nullptr;
  const LabelMap* training_labels = nullptr;
};

/// Stand-in for a network trained on the current labels. predict() may be
/// called concurrently for different images.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual LabelMap predict(const PredictorInput& input) = 0;
};

/// Returns the ground truth corrupted by per-class erosion or dilation of
/// radius round(4 * noise) and per-pixel random labels with probability
/// `noise`, seeded by (seed, image, round).
class SyntheticPredictor : public Predictor {
 public:
  SyntheticPredictor(std::vector<LabelMap> ground_truth, double noise, std::uint64_t seed, int n_classes);
  LabelMap predict(const PredictorInput& input) override;

 private:
  std::vector<LabelMap> gt_;
  double noise_;
  std::uint64_t seed_;
  int n_classes_;
};

struct HarnessImage {
  std::string stem;
  Image image;
  BoxSet boxes;
  LabelMap initial;
  std::optional<LabelMap> gt;
};

struct RoundStats {
  double changed_pixel_fraction = 0.0;
  std::vector<std::uint64_t> class_pixel_counts;  // index = label, 256 entries
  std::optional<double> miou;
};

struct RoundState {
  int round_index = 0;
  std::vector<LabelMap> labels;
  RoundStats stats;
};

/// Round 0 holds the initial labels; round r applies run_round to the
/// predictor's output trained on round r-1. mIoU is filled when every image
/// has ground truth.
std::vector<RoundState> recursive_harness(const std::vector<HarnessImage>& dataset, Predictor& predictor, int rounds,
                                          const WeakLabelConfig& cfg, const crf::Params& crf_params,
                                          const Stages& stages = {}, int threads = 1);

/// Writes round_<r>/<stem>.png and round_<r>/stats.json under `dir`.
void write_round(const std::filesystem::path& dir, const RoundState& state, const std::vector<HarnessImage>& dataset);

}  // namespace boxlabel::denoise
