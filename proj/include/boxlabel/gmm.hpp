#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "boxlabel/core.hpp"
#include "boxlabel/simd/kernels.hpp"

namespace boxlabel::gmm {

inline constexpr double kCovarianceRegularization = 1e-3;
inline constexpr int kMaxEmIterations = 50;
/// EM stops once the mean per-pixel log-likelihood gain drops below this.
inline constexpr double kEmTolerance = 1e-4;

struct Component {
  double weight = 1.0;
  std::array<double, 3> mean{};
  std::array<double, 9> covariance{};  // row-major, symmetric
};

/// Colours as structure-of-arrays doubles, the layout the kernels consume.
struct ColourColumns {
  std::vector<double> r, g, b;

  ColourColumns() = default;
  explicit ColourColumns(std::span<const Rgb> pixels);
  std::size_t size() const noexcept { return r.size(); }
};

/// Full-covariance RGB mixture. Immutable after construction.
class Gmm {
 public:
  /// Throws InvalidArgument unless weights sum to 1 (+-1e-9) and every
  /// covariance is symmetric positive definite.
  explicit Gmm(std::vector<Component> components);

  std::size_t size() const noexcept { return components_.size(); }
  std::span<const Component> components() const noexcept { return components_; }

  /// -log sum_k w_k N(pixel; mu_k, Sigma_k)
  double neg_log_likelihood(Rgb pixel) const;

  /// Batched form of neg_log_likelihood over `cols`, written to `out`.
  void neg_log_likelihood(const ColourColumns& cols, std::span<double> out) const;

  /// Sum of log densities over the columns.
  double log_likelihood(const ColourColumns& cols) const;

  friend bool operator==(const Gmm& a, const Gmm& b) noexcept;

 private:
  friend class EmFitter;
  std::vector<Component> components_;
  std::vector<simd::GaussianCoeffs> coeffs_;
};

struct FitTrace {
  /// Total data log-likelihood evaluated at the start of every EM iteration
  /// and once after the final M-step.
  std::vector<double> log_likelihood;
};

/// K-means++ seeding (deterministic from `seed`), hard-assignment
/// initialisation, then EM. K shrinks to the number of distinct seeds found
/// (never more than |pixels|). Covariances get kCovarianceRegularization * I.
Gmm fit_gmm(std::span<const Rgb> pixels, int k, std::uint64_t seed, FitTrace* trace = nullptr);

/// EM started from an existing model; used for warm restarts between GrabCut
/// iterations.
Gmm refine_gmm(std::span<const Rgb> pixels, const Gmm& init, FitTrace* trace = nullptr);

inline double neg_log_likelihood(const Gmm& g, Rgb pixel) { return g.neg_log_likelihood(pixel); }

}  // namespace boxlabel::gmm
