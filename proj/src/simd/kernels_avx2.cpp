// Compiled with -mavx2 -mfma; only reached after the runtime CPU check.
#include <immintrin.h>

#include <cmath>
#include <cstdlib>

#include "boxlabel/simd/kernels.hpp"

namespace boxlabel::simd {
namespace {

inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

// exp for |x| in the double range: Cody-Waite reduction to |r| <= ln2/2 and a
// degree-12 Taylor polynomial (truncation < 2e-16 relative). Inputs below
// -708 flush to zero.
inline __m256d exp_pd(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634074)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125e-1), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212e-6), r);

  __m256d p = _mm256_set1_pd(1.0 / 479001600.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  const __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_add_epi64(_mm256_cvtepi32_epi64(ni), _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, result);
}

void appearance_row(const PixelGrid& f, const AppearanceTables& t, std::size_t i, std::size_t begin, std::size_t end,
                    double row_scale, double* out) {
  const __m128i xi = _mm_set1_epi32(f.x[i]), ri = _mm_set1_epi32(f.r[i]);
  const __m128i gi = _mm_set1_epi32(f.g[i]), bi = _mm_set1_epi32(f.b[i]);
  const __m256d scale = _mm256_set1_pd(row_scale);
  std::size_t j = begin;
  for (; j + 4 <= end; j += 4) {
    const __m128i dx = _mm_abs_epi32(_mm_sub_epi32(_mm_loadu_si128(reinterpret_cast<const __m128i*>(f.x + j)), xi));
    const __m128i dr = _mm_sub_epi32(_mm_loadu_si128(reinterpret_cast<const __m128i*>(f.r + j)), ri);
    const __m128i dg = _mm_sub_epi32(_mm_loadu_si128(reinterpret_cast<const __m128i*>(f.g + j)), gi);
    const __m128i db = _mm_sub_epi32(_mm_loadu_si128(reinterpret_cast<const __m128i*>(f.b + j)), bi);
    const __m128i dc = _mm_add_epi32(_mm_add_epi32(_mm_mullo_epi32(dr, dr), _mm_mullo_epi32(dg, dg)), _mm_mullo_epi32(db, db));
    const __m256d ex = _mm256_i32gather_pd(t.ex, dx, 8);
    const __m256d ec = _mm256_i32gather_pd(t.ec, dc, 8);
    _mm256_storeu_pd(out + (j - begin), _mm256_mul_pd(_mm256_mul_pd(scale, ex), ec));
  }
  for (; j < end; ++j) {
    const std::int32_t dx = std::abs(f.x[j] - f.x[i]);
    const std::int32_t dr = f.r[j] - f.r[i], dg = f.g[j] - f.g[i], db = f.b[j] - f.b[i];
    out[j - begin] = row_scale * t.ex[dx] * t.ec[dr * dr + dg * dg + db * db];
  }
  if (i >= begin && i < end) out[i - begin] = 0.0;
}

void accumulate_messages(const double* k, std::size_t n, const double* q, std::size_t stride,
                         std::size_t n_labels, double* acc) {
  for (std::size_t l = 0; l < n_labels; ++l) {
    const double* ql = q + l * stride;
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      s0 = _mm256_fmadd_pd(_mm256_loadu_pd(k + j), _mm256_loadu_pd(ql + j), s0);
      s1 = _mm256_fmadd_pd(_mm256_loadu_pd(k + j + 4), _mm256_loadu_pd(ql + j + 4), s1);
    }
    for (; j + 4 <= n; j += 4) s0 = _mm256_fmadd_pd(_mm256_loadu_pd(k + j), _mm256_loadu_pd(ql + j), s0);
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; j < n; ++j) s += k[j] * ql[j];
    acc[l] += s;
  }
}

void gaussian_log_density(const GaussianCoeffs& c, const double* r, const double* g, const double* b,
                          std::size_t n, double* out) {
  const __m256d mr = _mm256_set1_pd(c.mean[0]), mg = _mm256_set1_pd(c.mean[1]), mb = _mm256_set1_pd(c.mean[2]);
  const __m256d p0 = _mm256_set1_pd(c.precision[0]), p1 = _mm256_set1_pd(2.0 * c.precision[1]);
  const __m256d p2 = _mm256_set1_pd(2.0 * c.precision[2]), p3 = _mm256_set1_pd(c.precision[3]);
  const __m256d p4 = _mm256_set1_pd(2.0 * c.precision[4]), p5 = _mm256_set1_pd(c.precision[5]);
  const __m256d norm = _mm256_set1_pd(c.log_norm), half = _mm256_set1_pd(-0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dr = _mm256_sub_pd(_mm256_loadu_pd(r + i), mr);
    const __m256d dg = _mm256_sub_pd(_mm256_loadu_pd(g + i), mg);
    const __m256d db = _mm256_sub_pd(_mm256_loadu_pd(b + i), mb);
    // rows of P applied to d, then dotted with d
    __m256d q = _mm256_mul_pd(_mm256_mul_pd(p0, dr), dr);
    q = _mm256_fmadd_pd(_mm256_mul_pd(p3, dg), dg, q);
    q = _mm256_fmadd_pd(_mm256_mul_pd(p5, db), db, q);
    q = _mm256_fmadd_pd(_mm256_mul_pd(p1, dr), dg, q);
    q = _mm256_fmadd_pd(_mm256_mul_pd(p2, dr), db, q);
    q = _mm256_fmadd_pd(_mm256_mul_pd(p4, dg), db, q);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(half, q, norm));
  }
  const double* p = c.precision;
  for (; i < n; ++i) {
    const double dr = r[i] - c.mean[0], dg = g[i] - c.mean[1], db = b[i] - c.mean[2];
    const double q = p[0] * dr * dr + p[3] * dg * dg + p[5] * db * db +
                     2.0 * (p[1] * dr * dg + p[2] * dr * db + p[4] * dg * db);
    out[i] = c.log_norm - 0.5 * q;
  }
}

void accumulate_exp(const double* v, const double* shift, std::size_t n, double* sum) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d e = exp_pd(_mm256_sub_pd(_mm256_loadu_pd(v + i), _mm256_loadu_pd(shift + i)));
    _mm256_storeu_pd(sum + i, _mm256_add_pd(_mm256_loadu_pd(sum + i), e));
  }
  for (; i < n; ++i) sum[i] += std::exp(v[i] - shift[i]);
}

}  // namespace

extern const KernelTable kAvx2Kernels;
const KernelTable kAvx2Kernels{Isa::Avx2, appearance_row, accumulate_messages, gaussian_log_density, accumulate_exp};

}  // namespace boxlabel::simd
