#include <algorithm>
#include <cmath>

#include "rotokin/simd/kernels.hpp"

namespace rotokin::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// C = A * B^T with column-major storage: C(i,j) = sum_k a[3k+i] * b[3k+j].
inline double prod_entry(const double* a, const double* b, int i, int j) {
  return a[i] * b[j] + a[3 + i] * b[3 + j] + a[6 + i] * b[6 + j];
}

void rotation_cos_sin_scalar(const double* a, const double* b, double* cos_out,
                             double* sin_out, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) {
    const double* ak = a + 9 * k;
    const double* bk = b + 9 * k;
    const double trace =
        prod_entry(ak, bk, 0, 0) + prod_entry(ak, bk, 1, 1) + prod_entry(ak, bk, 2, 2);
    const double sx = prod_entry(ak, bk, 2, 1) - prod_entry(ak, bk, 1, 2);
    const double sy = prod_entry(ak, bk, 0, 2) - prod_entry(ak, bk, 2, 0);
    const double sz = prod_entry(ak, bk, 1, 0) - prod_entry(ak, bk, 0, 1);
    cos_out[k] = std::clamp(0.5 * (trace - 1.0), -1.0, 1.0);
    sin_out[k] = 0.5 * std::sqrt(sx * sx + sy * sy + sz * sz);
  }
}

void point_distances_scalar(const double* a, const double* b, double* out,
                            std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) {
    const double dx = a[3 * k] - b[3 * k];
    const double dy = a[3 * k + 1] - b[3 * k + 1];
    const double dz = a[3 * k + 2] - b[3 * k + 2];
    out[k] = std::sqrt(dx * dx + dy * dy + dz * dz);
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", dot_scalar, axpy_scalar,
                                 rotation_cos_sin_scalar, point_distances_scalar};
  return table;
}

}  // namespace rotokin::simd
