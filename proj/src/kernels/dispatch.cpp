#include "lorasp/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

#include "lorasp/error.hpp"

namespace lorasp::kernels {

namespace {

constexpr KernelTable kScalar{&scalar::dot, &scalar::axpy, &scalar::scale, &scalar::csr_spmv};
constexpr KernelTable kAvx2{&avx2::dot, &avx2::axpy, &avx2::scale, &avx2::csr_spmv};

Isa detect() {
  if (const char* env = std::getenv("LORASP_FORCE_SCALAR"); env && std::strcmp(env, "0") != 0)
    return Isa::scalar;
  return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

const KernelTable& active() {
  static const KernelTable& t = table(active_isa());
  return t;
}

void check_size(std::size_t a, std::size_t b) {
  if (a != b) throw DimensionMismatch("vector kernel: length mismatch");
}

} // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
  case Isa::scalar: return true;
  case Isa::avx2:
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!isa_supported(isa)) throw Unsupported(std::string("kernel ISA not available: ") + isa_name(isa));
  return isa == Isa::avx2 ? kAvx2 : kScalar;
}

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

double dot(std::span<const double> x, std::span<const double> y) {
  check_size(x.size(), y.size());
  return active().dot(x.data(), y.data(), x.size());
}

double nrm2(std::span<const double> x) { return std::sqrt(active().dot(x.data(), x.data(), x.size())); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_size(x.size(), y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> x) { active().scale(alpha, x.data(), x.size()); }

} // namespace lorasp::kernels
