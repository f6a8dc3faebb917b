// Compiled with -mavx2 -mfma. Nothing in here may run before the dispatcher
// has confirmed CPU support.
#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "rotokin/simd/kernels.hpp"

namespace rotokin::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four rotation pairs per iteration. Each of the 9 matrix entries is gathered
// across the four pairs so every lane runs the scalar formula.
void rotation_cos_sin_avx2(const double* a, const double* b, double* cos_out,
                           double* sin_out, std::size_t count) {
  const __m256i stride = _mm256_set_epi64x(27, 18, 9, 0);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d minus_one = _mm256_set1_pd(-1.0);
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    __m256d av[9];
    __m256d bv[9];
    for (int e = 0; e < 9; ++e) {
      av[e] = _mm256_i64gather_pd(a + 9 * k + e, stride, 8);
      bv[e] = _mm256_i64gather_pd(b + 9 * k + e, stride, 8);
    }
    auto entry = [&](int i, int j) {
      __m256d s = _mm256_mul_pd(av[i], bv[j]);
      s = _mm256_fmadd_pd(av[3 + i], bv[3 + j], s);
      return _mm256_fmadd_pd(av[6 + i], bv[6 + j], s);
    };
    const __m256d trace = _mm256_add_pd(_mm256_add_pd(entry(0, 0), entry(1, 1)), entry(2, 2));
    const __m256d sx = _mm256_sub_pd(entry(2, 1), entry(1, 2));
    const __m256d sy = _mm256_sub_pd(entry(0, 2), entry(2, 0));
    const __m256d sz = _mm256_sub_pd(entry(1, 0), entry(0, 1));
    __m256d c = _mm256_mul_pd(half, _mm256_sub_pd(trace, one));
    c = _mm256_min_pd(_mm256_max_pd(c, minus_one), one);
    __m256d n2 = _mm256_mul_pd(sx, sx);
    n2 = _mm256_fmadd_pd(sy, sy, n2);
    n2 = _mm256_fmadd_pd(sz, sz, n2);
    _mm256_storeu_pd(cos_out + k, c);
    _mm256_storeu_pd(sin_out + k, _mm256_mul_pd(half, _mm256_sqrt_pd(n2)));
  }
  if (k < count) {
    scalar_kernels().rotation_cos_sin(a + 9 * k, b + 9 * k, cos_out + k, sin_out + k,
                                      count - k);
  }
}

void point_distances_avx2(const double* a, const double* b, double* out,
                          std::size_t count) {
  const __m256i stride = _mm256_set_epi64x(9, 6, 3, 0);
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    const double* ak = a + 3 * k;
    const double* bk = b + 3 * k;
    const __m256d dx = _mm256_sub_pd(_mm256_i64gather_pd(ak, stride, 8),
                                     _mm256_i64gather_pd(bk, stride, 8));
    const __m256d dy = _mm256_sub_pd(_mm256_i64gather_pd(ak + 1, stride, 8),
                                     _mm256_i64gather_pd(bk + 1, stride, 8));
    const __m256d dz = _mm256_sub_pd(_mm256_i64gather_pd(ak + 2, stride, 8),
                                     _mm256_i64gather_pd(bk + 2, stride, 8));
    __m256d n2 = _mm256_mul_pd(dx, dx);
    n2 = _mm256_fmadd_pd(dy, dy, n2);
    n2 = _mm256_fmadd_pd(dz, dz, n2);
    _mm256_storeu_pd(out + k, _mm256_sqrt_pd(n2));
  }
  if (k < count) {
    scalar_kernels().point_distances(a + 3 * k, b + 3 * k, out + k, count - k);
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{"avx2", dot_avx2, axpy_avx2, rotation_cos_sin_avx2,
                                 point_distances_avx2};
  return table;
}

}  // namespace rotokin::simd
