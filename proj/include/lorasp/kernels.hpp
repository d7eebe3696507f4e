#pragma once

// Vector kernels used on the Krylov and sparse matvec hot paths.
//
// Each kernel has a scalar reference implementation and an AVX2/FMA variant.
// The variant is picked once per process from the CPU feature bits; setting
// LORASP_FORCE_SCALAR=1 in the environment pins the scalar table.

#include <cstddef>
#include <span>

#include "lorasp/types.hpp"

namespace lorasp::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  double (*dot)(const double* x, const double* y, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*scale)(double alpha, double* x, std::size_t n);
  // y = A x for a CSR matrix with n rows.
  void (*csr_spmv)(std::size_t n, const Index* row_offsets, const Index* col_indices,
                   const double* values, const double* x, double* y);
};

const KernelTable& table(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
const char* isa_name(Isa isa);

double dot(std::span<const double> x, std::span<const double> y);
double nrm2(std::span<const double> x);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void csr_spmv(std::size_t n, const Index* row_offsets, const Index* col_indices,
              const double* values, const double* x, double* y);
} // namespace scalar

namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void csr_spmv(std::size_t n, const Index* row_offsets, const Index* col_indices,
              const double* values, const double* x, double* y);
} // namespace avx2

} // namespace lorasp::kernels
