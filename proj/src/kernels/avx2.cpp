// Compiled with -mavx2 -mfma; only reached after a cpuid check.

#include <immintrin.h>

#include <cmath>

#include "lindtomo/kernels.hpp"

namespace lindtomo::kernels {

namespace {

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Column j of C accumulates k rank-one updates; four rows per register and
// two columns per pass so each A load is reused.
void dgemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  const std::size_t m4 = m & ~std::size_t{3};
  std::size_t j = 0;
  for (; j + 1 < n; j += 2) {
    double* c0 = c + j * ldc;
    double* c1 = c + (j + 1) * ldc;
    for (std::size_t i = 0; i < m4; i += 4) {
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_loadu_pd(a + p * lda + i);
        acc0 = _mm256_fmadd_pd(av, _mm256_set1_pd(b[p + j * ldb]), acc0);
        acc1 = _mm256_fmadd_pd(av, _mm256_set1_pd(b[p + (j + 1) * ldb]), acc1);
      }
      _mm256_storeu_pd(c0 + i, acc0);
      _mm256_storeu_pd(c1 + i, acc1);
    }
    for (std::size_t i = m4; i < m; ++i) {
      double s0 = 0.0, s1 = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        s0 += a[p * lda + i] * b[p + j * ldb];
        s1 += a[p * lda + i] * b[p + (j + 1) * ldb];
      }
      c0[i] = s0;
      c1[i] = s1;
    }
  }
  for (; j < n; ++j) {
    double* cj = c + j * ldc;
    for (std::size_t i = 0; i < m4; i += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + p * lda + i), _mm256_set1_pd(b[p + j * ldb]),
                              acc);
      }
      _mm256_storeu_pd(cj + i, acc);
    }
    for (std::size_t i = m4; i < m; ++i) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[p * lda + i] * b[p + j * ldb];
      cj[i] = s;
    }
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

// The log itself stays scalar (libm); the clamp, division and masking are
// vectorized.
double weighted_log_avx2(const double* w, const double* p, std::size_t n, double floor,
                         double* ratio) {
  const __m256d vfloor = _mm256_set1_pd(floor);
  alignas(32) double clamped[4];
  double s = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vp = _mm256_loadu_pd(p + i);
    const __m256d vw = _mm256_loadu_pd(w + i);
    // NaN compares false, so NaN probabilities fall to the floor like the scalar path.
    const __m256d keep = _mm256_cmp_pd(vp, vfloor, _CMP_GT_OQ);
    const __m256d vc = _mm256_blendv_pd(vfloor, vp, keep);
    _mm256_store_pd(clamped, vc);
    s += w[i] * std::log(clamped[0]) + w[i + 1] * std::log(clamped[1]) +
         w[i + 2] * std::log(clamped[2]) + w[i + 3] * std::log(clamped[3]);
    if (ratio) {
      const __m256d r = _mm256_and_pd(_mm256_div_pd(vw, vc), keep);
      _mm256_storeu_pd(ratio + i, r);
    }
  }
  for (; i < n; ++i) {
    const bool cl = !(p[i] > floor);
    s += w[i] * std::log(cl ? floor : p[i]);
    if (ratio) ratio[i] = cl ? 0.0 : w[i] / p[i];
  }
  return s;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{"avx2", dgemm_avx2, dot_avx2, weighted_log_avx2};
  return &table;
}

}  // namespace lindtomo::kernels
