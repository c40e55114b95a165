#include <cstdlib>
#include <string_view>

#include "lindtomo/kernels.hpp"

namespace lindtomo::kernels {

#if !defined(LINDTOMO_HAVE_AVX2)
const KernelTable* avx2_kernels() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  const char* env = std::getenv("LINDTOMO_SIMD");
  if (env && std::string_view(env) == "scalar") return scalar_kernels();
  if (const KernelTable* t = avx2_kernels(); t && cpu_has_avx2()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace lindtomo::kernels
