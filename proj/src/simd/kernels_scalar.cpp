#include <cmath>
#include <cstdlib>

#include "boxlabel/simd/kernels.hpp"

namespace boxlabel::simd {
namespace {

void appearance_row(const PixelGrid& f, const AppearanceTables& t, std::size_t i, std::size_t begin, std::size_t end,
                    double row_scale, double* out) {
  const std::int32_t xi = f.x[i], ri = f.r[i], gi = f.g[i], bi = f.b[i];
  for (std::size_t j = begin; j < end; ++j) {
    const std::int32_t dx = std::abs(f.x[j] - xi);
    const std::int32_t dr = f.r[j] - ri, dg = f.g[j] - gi, db = f.b[j] - bi;
    out[j - begin] = row_scale * t.ex[dx] * t.ec[dr * dr + dg * dg + db * db];
  }
  if (i >= begin && i < end) out[i - begin] = 0.0;
}

void accumulate_messages(const double* k, std::size_t n, const double* q, std::size_t stride,
                         std::size_t n_labels, double* acc) {
  for (std::size_t l = 0; l < n_labels; ++l) {
    const double* ql = q + l * stride;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += k[j] * ql[j];
    acc[l] += s;
  }
}

void gaussian_log_density(const GaussianCoeffs& c, const double* r, const double* g, const double* b,
                          std::size_t n, double* out) {
  const double* p = c.precision;
  for (std::size_t i = 0; i < n; ++i) {
    const double dr = r[i] - c.mean[0], dg = g[i] - c.mean[1], db = b[i] - c.mean[2];
    const double q = p[0] * dr * dr + p[3] * dg * dg + p[5] * db * db +
                     2.0 * (p[1] * dr * dg + p[2] * dr * db + p[4] * dg * db);
    out[i] = c.log_norm - 0.5 * q;
  }
}

void accumulate_exp(const double* v, const double* shift, std::size_t n, double* sum) {
  for (std::size_t i = 0; i < n; ++i) sum[i] += std::exp(v[i] - shift[i]);
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{Isa::Scalar, appearance_row, accumulate_messages, gaussian_log_density,
                                 accumulate_exp};
  return table;
}

}  // namespace boxlabel::simd
