#include "boxlabel/densecrf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "boxlabel/simd/kernels.hpp"

namespace boxlabel::crf {
namespace {

// Largest squared RGB distance between two 8-bit colours.
constexpr std::size_t kMaxColourDistanceSq = 3 * 255 * 255;
// Working-set budget for the windowed mode.
constexpr std::size_t kMemoryBudgetBytes = std::size_t{2} << 30;

LabelMap argmax_labels(const ProbabilityMap& q) {
  LabelMap out(q.dims, 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int best = 0;
    for (int l = 1; l < q.n_labels; ++l)
      if (q.at(i, l) > q.at(i, best)) best = l;
    out[i] = static_cast<std::uint8_t>(best);
  }
  return out;
}

}  // namespace

void Params::validate() const {
  if (w_appearance < 0.0 || w_smooth < 0.0) throw Error(ErrorCode::InvalidArgument, "CRF kernel weights must be >= 0");
  if (!(theta_alpha > 0.0 && theta_beta > 0.0 && theta_gamma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "CRF kernel widths must be > 0");
  }
  if (iterations < 0) throw Error(ErrorCode::InvalidArgument, "CRF iterations must be >= 0");
}

ProbabilityMap labelmap_to_unaries(const LabelMap& map, int n_labels, double confidence) {
  if (n_labels < 2 || n_labels > 255) throw Error(ErrorCode::InvalidArgument, "n_labels must be in [2, 255]");
  if (!(confidence > 1.0 / n_labels && confidence < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "unary confidence must lie in (1/n_labels, 1)");
  }
  ProbabilityMap u(map.dims(), n_labels);
  const double other = (1.0 - confidence) / (n_labels - 1);
  const double uniform = 1.0 / n_labels;
  for (std::size_t i = 0; i < map.size(); ++i) {
    const int v = map[i];
    if (v == kIgnore) {
      for (int l = 0; l < n_labels; ++l) u.at(i, l) = uniform;
    } else if (v < n_labels) {
      for (int l = 0; l < n_labels; ++l) u.at(i, l) = l == v ? confidence : other;
    } else {
      throw Error(ErrorCode::InvalidArgument, "label " + std::to_string(v) + " outside [0, n_labels) and not ignore");
    }
  }
  return u;
}

MeanFieldResult meanfield(const ProbabilityMap& unaries, const Image& image, const Params& params,
                          const IterationObserver& observer, const simd::KernelTable* kernels) {
  params.validate();
  if (unaries.dims != image.dims()) throw Error(ErrorCode::DimensionMismatch, "unaries and image sizes differ");
  const std::size_t n = image.dims().pixel_count();
  const int n_labels = unaries.n_labels;
  if (n_labels < 1 || unaries.prob.size() != n * static_cast<std::size_t>(n_labels)) {
    throw Error(ErrorCode::DimensionMismatch, "unary table does not match the image");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int l = 0; l < n_labels; ++l) s += unaries.at(i, l);
    if (std::abs(s - 1.0) > 1e-6) throw Error(ErrorCode::InvalidArgument, "unaries must sum to 1 per pixel");
  }

  MeanFieldResult result;
  if (params.w_appearance == 0.0 && params.w_smooth == 0.0) {
    // no messages: the update is the identity on normalised unaries
    result.q = unaries;
    for (int it = 0; it < params.iterations; ++it)
      if (observer) observer(it, result.q);
    result.labels = argmax_labels(result.q);
    return result;
  }

  // Labels whose unary column is identical everywhere keep identical Q for
  // the whole run, so only one representative per group is propagated.
  std::vector<int> rep_of(static_cast<std::size_t>(n_labels));
  std::vector<int> reps;
  for (int l = 0; l < n_labels; ++l) {
    rep_of[static_cast<std::size_t>(l)] = l;
    for (int r : reps) {
      bool same = true;
      for (std::size_t i = 0; i < n && same; ++i) same = unaries.at(i, l) == unaries.at(i, r);
      if (same) {
        rep_of[static_cast<std::size_t>(l)] = r;
        break;
      }
    }
    if (rep_of[static_cast<std::size_t>(l)] == l) reps.push_back(l);
  }
  const std::size_t n_reps = reps.size();
  std::vector<double> multiplicity(n_reps, 0.0);
  std::vector<std::size_t> slot_of(static_cast<std::size_t>(n_labels));
  for (int l = 0; l < n_labels; ++l) {
    const auto slot = static_cast<std::size_t>(std::find(reps.begin(), reps.end(), rep_of[static_cast<std::size_t>(l)]) - reps.begin());
    slot_of[static_cast<std::size_t>(l)] = slot;
    multiplicity[slot] += 1.0;
  }

  const int w = image.width(), h = image.height();
  const bool exact = n <= kExactPixelLimit;
  if (!exact && 3 * n * n_reps * sizeof(double) > kMemoryBudgetBytes) {
    throw Error(ErrorCode::ImageTooLarge, "dense CRF working set exceeds the memory budget");
  }
  // Square window half-size; the whole image in exact mode.
  const int radius = exact ? std::max(w, h)
                           : static_cast<int>(std::ceil(5.0 * std::max(params.theta_alpha, params.theta_gamma)));

  std::vector<std::int32_t> fx(n), fr(n), fg(n), fb(n);
  for (std::size_t i = 0; i < n; ++i) {
    fx[i] = static_cast<std::int32_t>(i % static_cast<std::size_t>(w));
    const Rgb& c = image.pixels()[i];
    fr[i] = c.r;
    fg[i] = c.g;
    fb[i] = c.b;
  }
  const simd::PixelGrid grid{fx.data(), fr.data(), fg.data(), fb.data()};

  // Both kernels factor into per-axis spatial terms and a colour term, so
  // they are tabulated once instead of evaluating exp per pixel pair.
  const double pos_app = 1.0 / (2.0 * params.theta_alpha * params.theta_alpha);
  const double col_app = 1.0 / (2.0 * params.theta_beta * params.theta_beta);
  const double pos_smooth = 1.0 / (2.0 * params.theta_gamma * params.theta_gamma);
  auto spatial_table = [&](int len, double coeff) {
    std::vector<double> t(static_cast<std::size_t>(len));
    for (int d = 0; d < len; ++d) t[static_cast<std::size_t>(d)] = d > radius ? 0.0 : std::exp(-double(d) * d * coeff);
    return t;
  };
  const std::vector<double> ex = spatial_table(w, pos_app), ey = spatial_table(h, pos_app);
  const std::vector<double> gx = spatial_table(w, pos_smooth), gy = spatial_table(h, pos_smooth);
  std::vector<double> ec(kMaxColourDistanceSq + 1);
  for (std::size_t d = 0; d < ec.size(); ++d) ec[d] = params.w_appearance * std::exp(-static_cast<double>(d) * col_app);
  const simd::AppearanceTables tables{ex.data(), ec.data()};
  const simd::KernelTable& kt = kernels != nullptr ? *kernels : simd::active_kernels();

  // log unaries and Q, label-major over representatives
  std::vector<double> log_u(n_reps * n), q(n_reps * n), msg(n_reps * n);
  for (std::size_t s = 0; s < n_reps; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = unaries.at(i, reps[s]);
      log_u[s * n + i] = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
      q[s * n + i] = p;
    }
  }

  std::vector<double> row(static_cast<std::size_t>(w)), acc(n_reps), tmp(n);
  auto expand = [&](ProbabilityMap& out) {
    out = ProbabilityMap(unaries.dims, n_labels);
    for (std::size_t i = 0; i < n; ++i)
      for (int l = 0; l < n_labels; ++l) out.at(i, l) = q[slot_of[static_cast<std::size_t>(l)] * n + i];
  };

  std::vector<double> a(n_reps);
  for (int it = 0; it < params.iterations; ++it) {
    std::fill(msg.begin(), msg.end(), 0.0);
    if (params.w_appearance > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const int xi = static_cast<int>(i % static_cast<std::size_t>(w)), yi = static_cast<int>(i / static_cast<std::size_t>(w));
        const int x0 = std::max(0, xi - radius), x1 = std::min(w, xi + radius + 1);
        for (int y = std::max(0, yi - radius); y < std::min(h, yi + radius + 1); ++y) {
          const std::size_t begin = static_cast<std::size_t>(y) * w + x0, end = static_cast<std::size_t>(y) * w + x1;
          kt.appearance_row(grid, tables, i, begin, end, ey[static_cast<std::size_t>(std::abs(y - yi))], row.data());
          kt.accumulate_messages(row.data(), end - begin, q.data() + begin, n, n_reps, acc.data());
        }
        for (std::size_t s = 0; s < n_reps; ++s) msg[s * n + i] = acc[s];
      }
    }
    if (params.w_smooth > 0.0) {
      // separable Gaussian filter of each Q channel, minus the centre tap
      for (std::size_t s = 0; s < n_reps; ++s) {
        const double* qs = q.data() + s * n;
        for (int y = 0; y < h; ++y) {
          const double* qrow = qs + static_cast<std::size_t>(y) * w;
          for (int x = 0; x < w; ++x) {
            double sum = 0.0;
            for (int x2 = std::max(0, x - radius); x2 < std::min(w, x + radius + 1); ++x2)
              sum += gx[static_cast<std::size_t>(std::abs(x - x2))] * qrow[x2];
            tmp[static_cast<std::size_t>(y) * w + x] = sum;
          }
        }
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            double sum = 0.0;
            for (int y2 = std::max(0, y - radius); y2 < std::min(h, y + radius + 1); ++y2)
              sum += gy[static_cast<std::size_t>(std::abs(y - y2))] * tmp[static_cast<std::size_t>(y2) * w + x];
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            msg[s * n + i] += params.w_smooth * (sum - qs[i]);
          }
        }
      }
    }
    // Q_i(l) ~ P_i(l) exp(sum_j k_ij Q_j(l)); the Potts constant term cancels.
    for (std::size_t i = 0; i < n; ++i) {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < n_reps; ++s) {
        a[s] = log_u[s * n + i] + msg[s * n + i];
        top = std::max(top, a[s]);
      }
      double z = 0.0;
      for (std::size_t s = 0; s < n_reps; ++s) {
        a[s] = std::exp(a[s] - top);
        z += multiplicity[s] * a[s];
      }
      for (std::size_t s = 0; s < n_reps; ++s) q[s * n + i] = a[s] / z;
    }
    if (observer) {
      ProbabilityMap snapshot;
      expand(snapshot);
      observer(it, snapshot);
    }
  }

  expand(result.q);
  result.labels = argmax_labels(result.q);
  return result;
}

}  // namespace boxlabel::crf
