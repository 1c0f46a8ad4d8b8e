#include "enrich/kernels.hpp"

namespace enrich::kernels::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double squared_norm(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

void scaled_sum(const double* a, double alpha, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + alpha * b[i];
}

double sparse_dot(const std::uint32_t* idx, const double* val, std::size_t nnz, const double* dense) {
  double s = 0.0;
  for (std::size_t k = 0; k < nnz; ++k) s += val[k] * dense[idx[k]];
  return s;
}

}  // namespace

const KernelTable kScalar{"scalar", dot, axpy, squared_norm, scaled_sum, sparse_dot};

}  // namespace enrich::kernels::detail
