#include <cstdlib>
#include <string>

#include "lobtrend/error.hpp"
#include "lobtrend/kernels.hpp"

namespace lobtrend::kernels {

#if defined(LOBTREND_HAVE_AVX2)
namespace avx2 {
const KernelTable& table();
}
#endif

std::string_view level_name(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar: return "scalar";
    case SimdLevel::Avx2: return "avx2";
  }
  return "unknown";
}

bool supported(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar: return true;
    case SimdLevel::Avx2:
#if defined(LOBTREND_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(SimdLevel level) {
  if (!supported(level)) fail(Errc::InvalidArgument, "SIMD level not supported: " + std::string(level_name(level)));
#if defined(LOBTREND_HAVE_AVX2)
  if (level == SimdLevel::Avx2) return avx2::table();
#endif
  return scalar::table();
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("LOBTREND_SIMD")) {
    const std::string want = env;
    if (want == "scalar") return scalar::table();
    if (want == "avx2") return table(SimdLevel::Avx2);
    fail(Errc::ConfigError, "LOBTREND_SIMD must be scalar or avx2, got " + want);
  }
  return supported(SimdLevel::Avx2) ? table(SimdLevel::Avx2) : scalar::table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& t = select();
  return t;
}

}  // namespace lobtrend::kernels
