#include "boxlabel/grabcut.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "boxlabel/gmm.hpp"
#include "boxlabel/log.hpp"
#include "boxlabel/maxflow.hpp"
#include "boxlabel/rng.hpp"

namespace boxlabel::grabcut {
namespace {

// Forward half of the 8-neighbourhood: right, down, down-right, down-left.
constexpr std::array<std::array<int, 2>, 4> kForwardOffsets{{{1, 0}, {0, 1}, {1, 1}, {-1, 1}}};

double colour_distance_sq(const Rgb& a, const Rgb& b) {
  const double dr = double(a.r) - b.r, dg = double(a.g) - b.g, db = double(a.b) - b.b;
  return dr * dr + dg * dg + db * db;
}

}  // namespace

CropTrimap init_trimap(const Box& box, double margin, Dims dims) {
  if (!(margin >= 0.0)) throw Error(ErrorCode::InvalidArgument, "margin must be >= 0");
  const Box b = clip_box(box, dims);
  const int mx = static_cast<int>(std::lround(margin * b.width()));
  const int my = static_cast<int>(std::lround(margin * b.height()));
  Box crop{b.class_id, b.xmin - mx, b.ymin - my, b.xmax + mx, b.ymax + my};
  crop = clip_box(crop, dims);

  Trimap trimap(Dims{crop.width(), crop.height()}, TrimapState::DefiniteBackground);
  for (int y = b.ymin; y < b.ymax; ++y)
    for (int x = b.xmin; x < b.xmax; ++x) trimap.at(x - crop.xmin, y - crop.ymin) = TrimapState::ProbableForeground;
  return {crop, std::move(trimap)};
}

double contrast_beta(const Image& image, const Box& crop) {
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = crop.ymin; y < crop.ymax; ++y) {
    for (int x = crop.xmin; x < crop.xmax; ++x) {
      for (const auto& o : kForwardOffsets) {
        const int qx = x + o[0], qy = y + o[1];
        if (qx < crop.xmin || qx >= crop.xmax || qy >= crop.ymax) continue;
        sum += colour_distance_sq(image.at(x, y), image.at(qx, qy));
        ++count;
      }
    }
  }
  if (count == 0 || sum <= 0.0) return 0.0;
  return 1.0 / (2.0 * sum / static_cast<double>(count));
}

double pairwise_weight(Pixel p, Pixel q, const Image& image, const BoundaryMap* boundary, const Params& params,
                       double beta) {
  const int dx = std::abs(p.x - q.x), dy = std::abs(p.y - q.y);
  if (dx > 1 || dy > 1 || (dx == 0 && dy == 0)) {
    throw Error(ErrorCode::InvalidArgument, "pairwise_weight needs 8-adjacent pixels");
  }
  const double dist = (dx + dy == 2) ? std::sqrt(2.0) : 1.0;
  if (params.pairwise_source == PairwiseSource::BoundaryMap) {
    if (boundary == nullptr) throw Error(ErrorCode::MissingBoundaryMap, "boundary pairwise term selected without a boundary map");
    const double pb = std::max(boundary->at(p.x, p.y), boundary->at(q.x, q.y));
    return params.lambda * std::exp(-params.gamma_boundary * pb) / dist;
  }
  return params.lambda * std::exp(-beta * colour_distance_sq(image.at(p.x, p.y), image.at(q.x, q.y))) / dist;
}

Result run_grabcut_detailed(const Image& image, const Box& box, const WeakLabelConfig& cfg, const Params& params,
                            const BoundaryMap* boundary, std::uint64_t box_index) {
  if (params.lambda < 0.0 || params.gamma_boundary < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "lambda and gamma_boundary must be >= 0");
  }
  if (params.pairwise_source == PairwiseSource::BoundaryMap) {
    if (boundary == nullptr) throw Error(ErrorCode::MissingBoundaryMap, "GrabCut+ requires a boundary map");
    if (boundary->dims() != image.dims()) throw Error(ErrorCode::DimensionMismatch, "boundary map size differs from image");
  }
  const Box clipped = clip_box(box, image.dims());
  auto [crop, trimap] = init_trimap(clipped, params.margin, image.dims());
  const int cw = crop.width(), ch = crop.height();
  const std::size_t n = static_cast<std::size_t>(cw) * static_cast<std::size_t>(ch);

  Result result;
  auto fallback = [&](const char* why) {
    log_warning(std::string("grabcut: ") + why + "; using the box rectangle");
    result.mask = box_mask(clipped, image.dims());
    result.fell_back = true;
    return result;
  };

  const bool has_ring = std::any_of(trimap.values().begin(), trimap.values().end(),
                                    [](TrimapState s) { return s == TrimapState::DefiniteBackground; });
  if (!has_ring) {
    for (int x = 0; x < cw; ++x) {
      trimap.at(x, 0) = TrimapState::DefiniteBackground;
      trimap.at(x, ch - 1) = TrimapState::DefiniteBackground;
    }
    for (int y = 0; y < ch; ++y) {
      trimap.at(0, y) = TrimapState::DefiniteBackground;
      trimap.at(cw - 1, y) = TrimapState::DefiniteBackground;
    }
  }

  std::vector<Rgb> colours(n);
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x) colours[static_cast<std::size_t>(y) * cw + x] = image.at(crop.xmin + x, crop.ymin + y);
  const gmm::ColourColumns columns(colours);

  // node ids for the free (non-DefiniteBackground) pixels
  std::vector<int> node_of(n, -1);
  int n_free = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (trimap[i] != TrimapState::DefiniteBackground) node_of[i] = n_free++;
  }
  if (n_free == 0) return fallback("no free pixels inside the crop");

  struct PairEdge {
    std::size_t p, q;
    double w;
  };
  std::vector<PairEdge> pairs;
  const double beta = params.pairwise_source == PairwiseSource::RgbContrast ? contrast_beta(image, crop) : 0.0;
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      for (const auto& o : kForwardOffsets) {
        const int qx = x + o[0], qy = y + o[1];
        if (qx < 0 || qx >= cw || qy >= ch) continue;
        const std::size_t p = static_cast<std::size_t>(y) * cw + x, q = static_cast<std::size_t>(qy) * cw + qx;
        if (node_of[p] < 0 && node_of[q] < 0) continue;
        const double w = pairwise_weight({crop.xmin + x, crop.ymin + y}, {crop.xmin + qx, crop.ymin + qy}, image,
                                         boundary, params, beta);
        pairs.push_back({p, q, w});
      }
    }
  }

  std::vector<std::uint8_t> fg(n, 0);
  for (std::size_t i = 0; i < n; ++i) fg[i] = trimap[i] == TrimapState::ProbableForeground ? 1 : 0;
  if (std::none_of(fg.begin(), fg.end(), [](std::uint8_t v) { return v != 0; })) {
    return fallback("trimap has no probable foreground");
  }

  const std::uint64_t stream = cfg.rng_seed + box_index;
  std::vector<double> d_fg(n), d_bg(n);
  std::optional<gmm::Gmm> fg_model, bg_model;

  for (int iter = 0; iter < cfg.grabcut_iters; ++iter) {
    std::vector<Rgb> fg_px, bg_px;
    for (std::size_t i = 0; i < n; ++i) (fg[i] ? fg_px : bg_px).push_back(colours[i]);
    if (fg_px.empty()) return fallback("foreground became empty");
    if (iter == 0) {
      fg_model.emplace(gmm::fit_gmm(fg_px, cfg.gmm_components, derive_seed({stream, 1})));
      bg_model.emplace(gmm::fit_gmm(bg_px, cfg.gmm_components, derive_seed({stream, 2})));
    } else {
      fg_model.emplace(gmm::refine_gmm(fg_px, *fg_model));
      bg_model.emplace(gmm::refine_gmm(bg_px, *bg_model));
    }
    fg_model->neg_log_likelihood(columns, d_fg);
    bg_model->neg_log_likelihood(columns, d_bg);

    maxflow::FlowNetwork net(n_free);
    for (std::size_t i = 0; i < n; ++i) {
      if (node_of[i] < 0) continue;
      const double base = std::min(d_fg[i], d_bg[i]);
      // BG label pays the source link, FG label the sink link.
      net.add_terminal(node_of[i], d_bg[i] - base, d_fg[i] - base);
    }
    for (const auto& e : pairs) {
      const int a = node_of[e.p], b = node_of[e.q];
      if (a >= 0 && b >= 0) {
        net.add_edge(a, b, e.w, e.w);
      } else {
        net.add_terminal(a >= 0 ? a : b, 0.0, e.w);
      }
    }
    const auto cut = maxflow::min_cut(net);

    std::size_t changed = 0, fg_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint8_t v = 0;
      if (node_of[i] >= 0) v = cut.side[static_cast<std::size_t>(node_of[i])] == maxflow::Side::Source ? 1 : 0;
      changed += v != fg[i];
      fg_count += v;
      fg[i] = v;
    }

    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) energy += fg[i] ? d_fg[i] : d_bg[i];
    for (const auto& e : pairs)
      if (fg[e.p] != fg[e.q]) energy += e.w;
    result.energy.push_back(energy);
    result.iterations = iter + 1;

    if (fg_count == 0) return fallback("min-cut produced an empty foreground");
    if (static_cast<double>(changed) < 0.001 * static_cast<double>(n)) break;
  }

  result.mask = SegmentMask(image.dims(), 0);
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x)
      if (fg[static_cast<std::size_t>(y) * cw + x]) result.mask.at(crop.xmin + x, crop.ymin + y) = 1;
  return result;
}

SegmentMask run_grabcut(const Image& image, const Box& box, const WeakLabelConfig& cfg, const Params& params,
                        const BoundaryMap* boundary, std::uint64_t box_index) {
  return run_grabcut_detailed(image, box, cfg, params, boundary, box_index).mask;
}

}  // namespace boxlabel::grabcut
