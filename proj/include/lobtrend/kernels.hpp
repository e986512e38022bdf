#pragma once

// Data-parallel inner loops behind a runtime-selected kernel table. Every
// kernel has a scalar reference; SIMD variants are equivalence-tested against
// it. Element-wise kernels are bit-identical across levels; reductions (dot)
// agree to rounding.

#include <cstddef>
#include <string_view>

namespace lobtrend::kernels {

enum class SimdLevel { Scalar, Avx2 };

std::string_view level_name(SimdLevel level);

struct AdamStep {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct RmspropStep {
  double lr;
  double alpha;
  double eps;
};

struct KernelTable {
  SimdLevel level;
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// out = (x - mean) / scale, element-wise with per-element mean and scale
  void (*standardize)(const double* x, const double* mean, const double* scale, double* out, std::size_t n);
  void (*widen)(const float* in, double* out, std::size_t n);
  void (*adam_update)(double* param, double* m, double* v, const double* grad, std::size_t n, const AdamStep& s);
  void (*rmsprop_update)(double* param, double* sq, const double* grad, std::size_t n, const RmspropStep& s);
};

namespace scalar {
const KernelTable& table();
}

/// True when the CPU (and build) can run the given level.
bool supported(SimdLevel level);

/// Table for a specific level; throws InvalidArgument if unsupported.
const KernelTable& table(SimdLevel level);

/// Best supported level, unless LOBTREND_SIMD=scalar|avx2 overrides it.
const KernelTable& active();

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { active().axpy(a, x, y, n); }

}  // namespace lobtrend::kernels
