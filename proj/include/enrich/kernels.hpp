#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

// Dense/sparse arithmetic used by the softmax-regression optimizer.
//
// Every kernel has a scalar reference implementation. On x86-64 an AVX2+FMA
// variant is compiled into its own translation unit and selected at runtime
// when the CPU reports both features. Setting ENRICH_KERNELS=scalar forces
// the reference path. Reductions in the SIMD variant sum in a different
// order, so results agree with the scalar path to rounding, not bit-exactly.
namespace enrich::kernels {

struct KernelTable {
  std::string_view isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_norm)(const double* x, std::size_t n);
  // out = a + alpha * b
  void (*scaled_sum)(const double* a, double alpha, const double* b, double* out, std::size_t n);
  // sum_k val[k] * dense[idx[k]]
  double (*sparse_dot)(const std::uint32_t* idx, const double* val, std::size_t nnz, const double* dense);
};

const KernelTable& scalar_table();

// nullptr when the build has no AVX2 variant.
const KernelTable* avx2_table();

bool cpu_has_avx2_fma();

// Kernel set chosen once per process.
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double squared_norm(std::span<const double> x) { return active().squared_norm(x.data(), x.size()); }

inline void scaled_sum(std::span<const double> a, double alpha, std::span<const double> b, std::span<double> out) {
  active().scaled_sum(a.data(), alpha, b.data(), out.data(), a.size());
}

inline double sparse_dot(std::span<const std::uint32_t> idx, std::span<const double> val,
                         std::span<const double> dense) {
  return active().sparse_dot(idx.data(), val.data(), idx.size(), dense.data());
}

namespace detail {
extern const KernelTable kScalar;
#if defined(ENRICH_HAVE_AVX2)
extern const KernelTable kAvx2;
#endif
}  // namespace detail

}  // namespace enrich::kernels
