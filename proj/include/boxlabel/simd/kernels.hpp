#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

// Data-parallel inner loops of the CRF and GMM code. Each kernel has a scalar
// reference and (on x86-64) an AVX2+FMA variant; the variant is picked once at
// startup from CPUID and can be forced with BOXLABEL_SIMD=scalar|avx2.
namespace boxlabel::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

/// Structure-of-arrays integer pixel features: column and colour.
struct PixelGrid {
  const std::int32_t* x = nullptr;
  const std::int32_t* r = nullptr;
  const std::int32_t* g = nullptr;
  const std::int32_t* b = nullptr;
};

/// Lookup tables of the appearance kernel: ex[|dx|] = exp(-dx^2 / 2 theta_alpha^2)
/// and ec[|dc|^2] = w * exp(-|dc|^2 / 2 theta_beta^2), |dc|^2 <= 3 * 255^2.
struct AppearanceTables {
  const double* ex = nullptr;
  const double* ec = nullptr;
};

/// log N(z; mean, P^-1) + log w folded into `log_norm`; precision packed as
/// (rr, rg, rb, gg, gb, bb).
struct GaussianCoeffs {
  double mean[3] = {0.0, 0.0, 0.0};
  double precision[6] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  double log_norm = 0.0;
};

struct KernelTable {
  Isa isa;
  /// out[j - begin] = row_scale * ex[|x_j - x_i|] * ec[|c_j - c_i|^2] for j in
  /// [begin, end), zero at j == i.
  void (*appearance_row)(const PixelGrid& f, const AppearanceTables& t, std::size_t i, std::size_t begin,
                         std::size_t end, double row_scale, double* out);
  /// acc[l] += sum_{j<n} k[j] * q[l * stride + j] for l < n_labels.
  void (*accumulate_messages)(const double* k, std::size_t n, const double* q, std::size_t stride,
                              std::size_t n_labels, double* acc);
  /// out[i] = log_norm - 0.5 * (z_i - mean)^T P (z_i - mean).
  void (*gaussian_log_density)(const GaussianCoeffs& c, const double* r, const double* g, const double* b,
                               std::size_t n, double* out);
  /// sum[i] += exp(v[i] - shift[i]).
  void (*accumulate_exp)(const double* v, const double* shift, std::size_t n, double* sum);
};

const KernelTable& scalar_kernels() noexcept;

/// Kernels compiled into this binary that the running CPU can execute.
std::vector<Isa> available_isas();

/// Throws InvalidArgument if `isa` is not available.
const KernelTable& kernels_for(Isa isa);

/// The dispatched table (best available unless overridden by BOXLABEL_SIMD).
const KernelTable& active_kernels();

}  // namespace boxlabel::simd
