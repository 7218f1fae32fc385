#include <cstdlib>
#include <string>

#include "boxlabel/error.hpp"
#include "boxlabel/simd/kernels.hpp"

namespace boxlabel::simd {

#if defined(BOXLABEL_HAVE_AVX2)
extern const KernelTable kAvx2Kernels;
#endif

namespace {

bool cpu_has_avx2() {
#if defined(BOXLABEL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  const char* forced = std::getenv("BOXLABEL_SIMD");
  if (forced != nullptr && std::string(forced) == "scalar") return scalar_kernels();
#if defined(BOXLABEL_HAVE_AVX2)
  if (cpu_has_avx2()) return kAvx2Kernels;
#endif
  return scalar_kernels();
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> isas{Isa::Scalar};
  if (cpu_has_avx2()) isas.push_back(Isa::Avx2);
  return isas;
}

const KernelTable& kernels_for(Isa isa) {
  if (isa == Isa::Scalar) return scalar_kernels();
#if defined(BOXLABEL_HAVE_AVX2)
  if (isa == Isa::Avx2 && cpu_has_avx2()) return kAvx2Kernels;
#endif
  throw Error(ErrorCode::InvalidArgument, std::string("SIMD variant not available: ") + std::string(to_string(isa)));
}

const KernelTable& active_kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace boxlabel::simd
