#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "boxlabel/core.hpp"
#include "boxlabel/simd/kernels.hpp"

namespace boxlabel::crf {

struct Params {
  double w_appearance = 5.0;
  double theta_alpha = 60.0;  // px
  double theta_beta = 10.0;   // colour units
  double w_smooth = 3.0;
  double theta_gamma = 3.0;  // px
  int iterations = 10;
  double unary_confidence = 0.9;

  void validate() const;
};

/// Pixel-major probabilities: value(i, l) = prob[i * n_labels + l].
struct ProbabilityMap {
  Dims dims;
  int n_labels = 0;
  std::vector<double> prob;

  ProbabilityMap() = default;
  ProbabilityMap(Dims d, int labels) : dims(d), n_labels(labels), prob(d.pixel_count() * static_cast<std::size_t>(labels), 0.0) {}

  double& at(std::size_t pixel, int label) { return prob[pixel * static_cast<std::size_t>(n_labels) + static_cast<std::size_t>(label)]; }
  double at(std::size_t pixel, int label) const {
    return prob[pixel * static_cast<std::size_t>(n_labels) + static_cast<std::size_t>(label)];
  }
};

/// Hard labels to soft unaries: the labelled class gets `confidence`, the
/// rest share 1 - confidence; ignore (255) pixels are uniform.
ProbabilityMap labelmap_to_unaries(const LabelMap& map, int n_labels, double confidence);

/// Largest image (in pixels) handled with exact all-pairs message passing.
inline constexpr std::size_t kExactPixelLimit = 16384;

struct MeanFieldResult {
  ProbabilityMap q;
  LabelMap labels;  // argmax, ties to the lowest label
};

/// Called after every update with (iteration index, current Q).
using IterationObserver = std::function<void(int, const ProbabilityMap&)>;

/// Synchronous mean-field inference for a fully connected Potts CRF with an
/// appearance and a smoothness Gaussian kernel. Exact O(N^2) messages up to
/// kExactPixelLimit pixels, a 5-sigma spatial window above that. `kernels`
/// overrides the dispatched SIMD variant.
MeanFieldResult meanfield(const ProbabilityMap& unaries, const Image& image, const Params& params,
                          const IterationObserver& observer = {}, const simd::KernelTable* kernels = nullptr);

}  // namespace boxlabel::crf
