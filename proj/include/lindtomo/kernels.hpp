#pragma once

// Dense real kernels behind the likelihood evaluation. Every kernel has a
// portable scalar reference and, where the CPU supports it, an AVX2/FMA
// variant; the table is picked once at first use.

#include <cstddef>
#include <string_view>

namespace lindtomo::kernels {

// C (m x n) = A (m x k) * B (k x n), all column-major with leading dimensions.
using DgemmFn = void (*)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                         std::size_t lda, const double* b, std::size_t ldb, double* c,
                         std::size_t ldc);
using DotFn = double (*)(const double* a, const double* b, std::size_t n);
// sum_i w_i * log(max(p_i, floor)); also writes w_i / p_i (0 where clamped)
// into ratio when ratio is non-null.
using WeightedLogFn = double (*)(const double* w, const double* p, std::size_t n, double floor,
                                 double* ratio);

struct KernelTable {
  std::string_view name;
  DgemmFn dgemm;
  DotFn dot;
  WeightedLogFn weighted_log;
};

const KernelTable& scalar_kernels();
// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_kernels();

// AVX2 when the CPU has avx2+fma, unless LINDTOMO_SIMD=scalar is set.
const KernelTable& active();

}  // namespace lindtomo::kernels
