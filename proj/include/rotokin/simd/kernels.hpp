#pragma once

// Data-parallel inner loops shared by the loss, metric and regressor code.
//
// Every kernel has a scalar reference implementation. Where the host supports
// it, an AVX2+FMA variant is selected at runtime; the two are checked against
// each other in tests/test_kernels.cpp. Results agree to rounding, not bitwise:
// the vector variants reassociate sums.
//
// Rotation inputs are 3x3 matrices stored as 9 contiguous doubles in Eigen's
// default column-major order (element (i,j) at offset 3*j+i).

#include <cstddef>
#include <span>
#include <string_view>

namespace rotokin::simd {

struct KernelTable {
  std::string_view name;

  // sum_i a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[i] += alpha*x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // For each pair k, with C = A_k * B_k^T:
  //   cos_out[k] = clamp((trace(C) - 1) / 2, -1, 1)
  //   sin_out[k] = |vee(C - C^T)| / 2
  // so the angle between A_k and B_k is atan2(sin_out[k], cos_out[k]).
  void (*rotation_cos_sin)(const double* a, const double* b, double* cos_out,
                           double* sin_out, std::size_t count);

  // out[k] = |a_k - b_k| for packed 3-vectors.
  void (*point_distances)(const double* a, const double* b, double* out,
                          std::size_t count);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const KernelTable* avx2_kernels();

// Kernel table used by the library. Chosen once per process: AVX2 when
// available, unless ROTOKIN_SIMD=scalar is set in the environment.
const KernelTable& active();

// Convenience wrappers over active().
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace rotokin::simd
