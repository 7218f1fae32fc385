#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "boxlabel/densecrf.hpp"
#include "boxlabel/rng.hpp"
#include "boxlabel/simd/kernels.hpp"
#include "boxlabel/synthcorpus.hpp"

using namespace boxlabel;

namespace {

bool has_avx2() {
  const auto isas = simd::available_isas();
  return std::find(isas.begin(), isas.end(), simd::Isa::Avx2) != isas.end();
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST_CASE("scalar kernels are always available") {
  const auto isas = simd::available_isas();
  CHECK(std::find(isas.begin(), isas.end(), simd::Isa::Scalar) != isas.end());
  CHECK(simd::kernels_for(simd::Isa::Scalar).isa == simd::Isa::Scalar);
  CHECK(simd::to_string(simd::Isa::Avx2) == "avx2");
}

TEST_CASE("appearance_row variants agree bit for bit") {
  if (!has_avx2()) {
    MESSAGE("AVX2 not available on this CPU; equivalence not exercised");
    return;
  }
  const auto& s = simd::kernels_for(simd::Isa::Scalar);
  const auto& v = simd::kernels_for(simd::Isa::Avx2);
  Rng rng(11);
  const std::size_t w = 37, n = w * 5;
  std::vector<std::int32_t> x(n), r(n), g(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<std::int32_t>(i % w);
    r[i] = static_cast<std::int32_t>(rng.below(256));
    g[i] = static_cast<std::int32_t>(rng.below(256));
    b[i] = static_cast<std::int32_t>(rng.below(256));
  }
  std::vector<double> ex(w), ec(3 * 255 * 255 + 1);
  for (std::size_t d = 0; d < w; ++d) ex[d] = std::exp(-double(d * d) / 200.0);
  for (std::size_t d = 0; d < ec.size(); ++d) ec[d] = 5.0 * std::exp(-double(d) / 200.0);
  const simd::PixelGrid grid{x.data(), r.data(), g.data(), b.data()};
  const simd::AppearanceTables tables{ex.data(), ec.data()};
  for (std::size_t i : {std::size_t{0}, std::size_t{40}, n - 1}) {
    for (std::size_t row = 0; row < 5; ++row) {
      for (std::size_t off : {std::size_t{0}, std::size_t{3}}) {
        const std::size_t begin = row * w + off, end = row * w + w - off / 2;
        std::vector<double> a(end - begin), c(end - begin);
        s.appearance_row(grid, tables, i, begin, end, 0.75, a.data());
        v.appearance_row(grid, tables, i, begin, end, 0.75, c.data());
        CHECK(a == c);
        if (i >= begin && i < end) CHECK(a[i - begin] == 0.0);
      }
    }
  }
}

TEST_CASE("accumulate_messages and accumulate_exp variants agree") {
  if (!has_avx2()) return;
  const auto& s = simd::kernels_for(simd::Isa::Scalar);
  const auto& v = simd::kernels_for(simd::Isa::Avx2);
  Rng rng(5);
  for (std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{4}, std::size_t{17}, std::size_t{250}}) {
    const std::size_t labels = 6;
    std::vector<double> k(n), q(labels * n), shift(n), vals(n);
    for (auto& e : k) e = rng.uniform();
    for (auto& e : q) e = rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      vals[i] = rng.uniform(-700.0, 10.0);
      shift[i] = rng.uniform(-5.0, 5.0);
    }
    std::vector<double> a(labels, 0.5), b(labels, 0.5);
    s.accumulate_messages(k.data(), n, q.data(), n, labels, a.data());
    v.accumulate_messages(k.data(), n, q.data(), n, labels, b.data());
    for (std::size_t l = 0; l < labels; ++l) CHECK(rel_diff(a[l], b[l]) < 1e-12);

    std::vector<double> sa(n, 1.0), sb(n, 1.0);
    s.accumulate_exp(vals.data(), shift.data(), n, sa.data());
    v.accumulate_exp(vals.data(), shift.data(), n, sb.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_diff(sa[i], sb[i]) < 1e-13);
  }
}

TEST_CASE("gaussian_log_density variants agree") {
  if (!has_avx2()) return;
  const auto& s = simd::kernels_for(simd::Isa::Scalar);
  const auto& v = simd::kernels_for(simd::Isa::Avx2);
  simd::GaussianCoeffs c;
  c.mean[0] = 120.0;
  c.mean[1] = 30.5;
  c.mean[2] = 200.0;
  const double p[6] = {0.02, 0.001, -0.003, 0.01, 0.0005, 0.03};
  std::copy(p, p + 6, c.precision);
  c.log_norm = -9.25;
  Rng rng(9);
  const std::size_t n = 103;
  std::vector<double> r(n), g(n), b(n), oa(n), ob(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = static_cast<double>(rng.below(256));
    g[i] = static_cast<double>(rng.below(256));
    b[i] = static_cast<double>(rng.below(256));
  }
  s.gaussian_log_density(c, r.data(), g.data(), b.data(), n, oa.data());
  v.gaussian_log_density(c, r.data(), g.data(), b.data(), n, ob.data());
  for (std::size_t i = 0; i < n; ++i) CHECK(rel_diff(oa[i], ob[i]) < 1e-12);
}

TEST_CASE("mean-field inference matches across kernel variants") {
  if (!has_avx2()) return;
  synth::SceneSpec spec;
  spec.canvas = {32, 28};
  spec.seed = 4;
  const auto scene = synth::generate(spec);
  const auto unaries = crf::labelmap_to_unaries(scene.labels, 21, 0.6);
  crf::Params params;
  params.iterations = 5;
  const auto a = crf::meanfield(unaries, scene.image, params, {}, &simd::kernels_for(simd::Isa::Scalar));
  const auto b = crf::meanfield(unaries, scene.image, params, {}, &simd::kernels_for(simd::Isa::Avx2));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.q.prob.size(); ++i) worst = std::max(worst, std::abs(a.q.prob[i] - b.q.prob[i]));
  CHECK(worst < 1e-10);
  CHECK(a.labels == b.labels);
}
