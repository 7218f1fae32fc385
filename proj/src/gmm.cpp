#include "boxlabel/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "boxlabel/rng.hpp"

namespace boxlabel::gmm {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6]);
}

simd::GaussianCoeffs make_coeffs(const Component& c) {
  const auto& m = c.covariance;
  const double det = det3(m);
  simd::GaussianCoeffs out;
  out.mean[0] = c.mean[0];
  out.mean[1] = c.mean[1];
  out.mean[2] = c.mean[2];
  // symmetric inverse from cofactors
  out.precision[0] = (m[4] * m[8] - m[5] * m[7]) / det;
  out.precision[1] = (m[2] * m[7] - m[1] * m[8]) / det;
  out.precision[2] = (m[1] * m[5] - m[2] * m[4]) / det;
  out.precision[3] = (m[0] * m[8] - m[2] * m[6]) / det;
  out.precision[4] = (m[2] * m[3] - m[0] * m[5]) / det;
  out.precision[5] = (m[0] * m[4] - m[1] * m[3]) / det;
  out.log_norm = std::log(c.weight) - 0.5 * std::log(det) - 1.5 * kLog2Pi;
  return out;
}

double log_density(const simd::GaussianCoeffs& c, double r, double g, double b) {
  const double* p = c.precision;
  const double dr = r - c.mean[0], dg = g - c.mean[1], db = b - c.mean[2];
  const double q =
      p[0] * dr * dr + p[3] * dg * dg + p[5] * db * db + 2.0 * (p[1] * dr * dg + p[2] * dr * db + p[4] * dg * db);
  return c.log_norm - 0.5 * q;
}

}  // namespace

ColourColumns::ColourColumns(std::span<const Rgb> pixels) : r(pixels.size()), g(pixels.size()), b(pixels.size()) {
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    r[i] = pixels[i].r;
    g[i] = pixels[i].g;
    b[i] = pixels[i].b;
  }
}

Gmm::Gmm(std::vector<Component> components) : components_(std::move(components)) {
  if (components_.empty()) throw Error(ErrorCode::InvalidArgument, "mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw Error(ErrorCode::InvalidArgument, "component weights must be positive");
    }
    total += c.weight;
    const auto& m = c.covariance;
    if (m[1] != m[3] || m[2] != m[6] || m[5] != m[7]) {
      throw Error(ErrorCode::InvalidArgument, "covariance must be symmetric");
    }
    if (!(m[0] > 0.0 && m[0] * m[4] - m[1] * m[3] > 0.0 && det3(m) > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "covariance must be positive definite");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "component weights must sum to 1");
  coeffs_.reserve(components_.size());
  for (const auto& c : components_) coeffs_.push_back(make_coeffs(c));
}

double Gmm::neg_log_likelihood(Rgb pixel) const {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(coeffs_.size());
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    terms[k] = log_density(coeffs_[k], pixel.r, pixel.g, pixel.b);
    best = std::max(best, terms[k]);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - best);
  return -(best + std::log(sum));
}

namespace {

// Per-pixel log sum_k w_k N_k written to `loglik`; per-component log terms
// kept in `terms` (component-major) for the responsibilities.
void log_mixture(std::span<const simd::GaussianCoeffs> coeffs, const ColourColumns& cols, std::vector<double>& terms,
                 std::vector<double>& loglik) {
  const auto& kt = simd::active_kernels();
  const std::size_t n = cols.size();
  const std::size_t k_count = coeffs.size();
  terms.resize(n * k_count);
  loglik.assign(n, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < k_count; ++k) {
    double* tk = terms.data() + k * n;
    kt.gaussian_log_density(coeffs[k], cols.r.data(), cols.g.data(), cols.b.data(), n, tk);
    for (std::size_t i = 0; i < n; ++i) loglik[i] = std::max(loglik[i], tk[i]);
  }
  std::vector<double> sum(n, 0.0);
  for (std::size_t k = 0; k < k_count; ++k) kt.accumulate_exp(terms.data() + k * n, loglik.data(), n, sum.data());
  for (std::size_t i = 0; i < n; ++i) loglik[i] += std::log(sum[i]);
}

}  // namespace

void Gmm::neg_log_likelihood(const ColourColumns& cols, std::span<double> out) const {
  if (out.size() != cols.size()) throw Error(ErrorCode::DimensionMismatch, "output span size differs from input");
  std::vector<double> terms, loglik;
  log_mixture(coeffs_, cols, terms, loglik);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -loglik[i];
}

double Gmm::log_likelihood(const ColourColumns& cols) const {
  std::vector<double> terms, loglik;
  log_mixture(coeffs_, cols, terms, loglik);
  double total = 0.0;
  for (double v : loglik) total += v;
  return total;
}

bool operator==(const Gmm& a, const Gmm& b) noexcept {
  if (a.components_.size() != b.components_.size()) return false;
  for (std::size_t k = 0; k < a.components_.size(); ++k) {
    const auto& x = a.components_[k];
    const auto& y = b.components_[k];
    if (x.weight != y.weight || x.mean != y.mean || x.covariance != y.covariance) return false;
  }
  return true;
}

class EmFitter {
 public:
  static Gmm run(const ColourColumns& cols, std::vector<Component> comps, FitTrace* trace) {
    const std::size_t n = cols.size();
    std::vector<double> terms, loglik, resp(n);
    std::vector<simd::GaussianCoeffs> coeffs;
    double prev = -std::numeric_limits<double>::infinity();

    for (int iter = 0;; ++iter) {
      coeffs.clear();
      for (const auto& c : comps) coeffs.push_back(make_coeffs(c));
      log_mixture(coeffs, cols, terms, loglik);
      double total = 0.0;
      for (double v : loglik) total += v;
      if (trace != nullptr) trace->log_likelihood.push_back(total);
      if (iter > 0 && (total - prev) / static_cast<double>(n) < kEmTolerance) break;
      if (iter == kMaxEmIterations) break;
      prev = total;

      std::vector<Component> next;
      std::vector<double> mass;
      const auto& kt = simd::active_kernels();
      for (std::size_t k = 0; k < comps.size(); ++k) {
        std::fill(resp.begin(), resp.end(), 0.0);
        kt.accumulate_exp(terms.data() + k * n, loglik.data(), n, resp.data());
        Component c = weighted_moments(cols, resp, comps[k]);
        if (c.weight <= 0.0) continue;
        mass.push_back(c.weight);
        next.push_back(c);
      }
      normalise_weights(next, mass);
      comps = std::move(next);
    }
    return Gmm(std::move(comps));
  }

  // Component from responsibility-weighted moments. weight holds the raw
  // responsibility mass until normalise_weights runs. Components whose mass
  // underflows keep their previous shape.
  static Component weighted_moments(const ColourColumns& cols, std::span<const double> w, const Component& prev) {
    const std::size_t n = cols.size();
    double mass = 0.0, sr = 0.0, sg = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mass += w[i];
      sr += w[i] * cols.r[i];
      sg += w[i] * cols.g[i];
      sb += w[i] * cols.b[i];
    }
    Component c = prev;
    c.weight = mass;
    if (mass <= 1e-10 * static_cast<double>(n)) return c;
    c.mean = {sr / mass, sg / mass, sb / mass};
    double crr = 0, crg = 0, crb = 0, cgg = 0, cgb = 0, cbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dr = cols.r[i] - c.mean[0], dg = cols.g[i] - c.mean[1], db = cols.b[i] - c.mean[2];
      crr += w[i] * dr * dr;
      crg += w[i] * dr * dg;
      crb += w[i] * dr * db;
      cgg += w[i] * dg * dg;
      cgb += w[i] * dg * db;
      cbb += w[i] * db * db;
    }
    const double reg = kCovarianceRegularization;
    c.covariance = {crr / mass + reg, crg / mass,       crb / mass,
                    crg / mass,       cgg / mass + reg, cgb / mass,
                    crb / mass,       cgb / mass,       cbb / mass + reg};
    return c;
  }

  static void normalise_weights(std::vector<Component>& comps, std::span<const double> mass) {
    double total = 0.0;
    for (double m : mass) total += m;
    for (std::size_t k = 0; k < comps.size(); ++k) comps[k].weight = mass[k] / total;
  }
};

Gmm fit_gmm(std::span<const Rgb> pixels, int k, std::uint64_t seed, FitTrace* trace) {
  if (pixels.empty()) throw Error(ErrorCode::EmptyInput, "cannot fit a mixture to zero pixels");
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "component count must be >= 1");
  const ColourColumns cols(pixels);
  const std::size_t n = cols.size();
  const std::size_t k_max = std::min<std::size_t>(static_cast<std::size_t>(k), n);

  // k-means++ seeding
  Rng rng(derive_seed({seed, 0x6d6dULL}));
  std::vector<std::array<double, 3>> centers;
  const std::size_t first = static_cast<std::size_t>(rng.below(n));
  centers.push_back({cols.r[first], cols.g[first], cols.b[first]});
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (centers.size() < k_max) {
    const auto& c = centers.back();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dr = cols.r[i] - c[0], dg = cols.g[i] - c[1], db = cols.b[i] - c[2];
      d2[i] = std::min(d2[i], dr * dr + dg * dg + db * db);
      total += d2[i];
    }
    if (total <= 0.0) break;
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (acc > target && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
    while (d2[pick] <= 0.0 && pick > 0) --pick;
    centers.push_back({cols.r[pick], cols.g[pick], cols.b[pick]});
  }

  // hard assignment to the nearest seed
  std::vector<std::vector<double>> member(centers.size(), std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double dr = cols.r[i] - centers[c][0], dg = cols.g[i] - centers[c][1], db = cols.b[i] - centers[c][2];
      const double d = dr * dr + dg * dg + db * db;
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    member[best][i] = 1.0;
  }
  std::vector<Component> comps;
  std::vector<double> mass;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    Component seed_comp;
    seed_comp.mean = centers[c];
    Component m = EmFitter::weighted_moments(cols, member[c], seed_comp);
    if (m.weight <= 0.0) continue;
    mass.push_back(m.weight);
    comps.push_back(m);
  }
  EmFitter::normalise_weights(comps, mass);
  return EmFitter::run(cols, std::move(comps), trace);
}

Gmm refine_gmm(std::span<const Rgb> pixels, const Gmm& init, FitTrace* trace) {
  if (pixels.empty()) throw Error(ErrorCode::EmptyInput, "cannot fit a mixture to zero pixels");
  const ColourColumns cols(pixels);
  return EmFitter::run(cols, {init.components().begin(), init.components().end()}, trace);
}

}  // namespace boxlabel::gmm
