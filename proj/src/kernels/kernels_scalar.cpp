#include "lorasp/kernels.hpp"

namespace lorasp::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void csr_spmv(std::size_t n, const Index* row_offsets, const Index* col_indices,
              const double* values, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (Index p = row_offsets[i]; p < row_offsets[i + 1]; ++p) s += values[p] * x[col_indices[p]];
    y[i] = s;
  }
}

} // namespace lorasp::kernels::scalar
