#include <algorithm>
#include <cmath>

#include "lindtomo/kernels.hpp"

namespace lindtomo::kernels {

namespace {

void dgemm_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t j = 0; j < n; ++j) {
    double* cj = c + j * ldc;
    std::fill(cj, cj + m, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double bpj = b[p + j * ldb];
      const double* ap = a + p * lda;
      for (std::size_t i = 0; i < m; ++i) cj[i] += ap[i] * bpj;
    }
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double weighted_log_scalar(const double* w, const double* p, std::size_t n, double floor,
                           double* ratio) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool clamped = !(p[i] > floor);
    s += w[i] * std::log(clamped ? floor : p[i]);
    if (ratio) ratio[i] = clamped ? 0.0 : w[i] / p[i];
  }
  return s;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", dgemm_scalar, dot_scalar, weighted_log_scalar};
  return table;
}

}  // namespace lindtomo::kernels
