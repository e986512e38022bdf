#include <cmath>

#include "lobtrend/kernels.hpp"

namespace lobtrend::kernels::scalar {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void standardize(const double* x, const double* mean, const double* scale, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - mean[i]) / scale[i];
}

void widen(const float* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(in[i]);
}

void adam_update(double* p, double* m, double* v, const double* g, std::size_t n, const AdamStep& s) {
  const double c1 = 1.0 - s.beta1;
  const double c2 = 1.0 - s.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = s.beta1 * m[i] + c1 * g[i];
    v[i] = s.beta2 * v[i] + c2 * (g[i] * g[i]);
    const double m_hat = m[i] / s.bias_correction1;
    const double v_hat = v[i] / s.bias_correction2;
    p[i] = p[i] - s.lr * (m_hat / (std::sqrt(v_hat) + s.eps));
  }
}

void rmsprop_update(double* p, double* sq, const double* g, std::size_t n, const RmspropStep& s) {
  const double c = 1.0 - s.alpha;
  for (std::size_t i = 0; i < n; ++i) {
    sq[i] = s.alpha * sq[i] + c * (g[i] * g[i]);
    p[i] = p[i] - s.lr * (g[i] / (std::sqrt(sq[i]) + s.eps));
  }
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{SimdLevel::Scalar, dot, axpy, standardize, widen, adam_update, rmsprop_update};
  return t;
}

}  // namespace lobtrend::kernels::scalar
