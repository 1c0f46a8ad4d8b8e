#include "enrich/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace enrich::kernels {

const KernelTable& scalar_table() { return detail::kScalar; }

const KernelTable* avx2_table() {
#if defined(ENRICH_HAVE_AVX2)
  return &detail::kAvx2;
#else
  return nullptr;
#endif
}

bool cpu_has_avx2_fma() {
#if defined(ENRICH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("ENRICH_KERNELS"); env != nullptr && std::string_view(env) == "scalar") {
    return scalar_table();
  }
  if (const KernelTable* t = avx2_table(); t != nullptr && cpu_has_avx2_fma()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace enrich::kernels
