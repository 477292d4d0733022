#pragma once
// Dense double-precision inner loops used by both engines.
//
// Every kernel has a portable scalar reference implementation and, on x86-64
// builds, an AVX2+FMA variant. The variant is chosen once at startup from the
// CPU feature flags; EVOTREE_SIMD=scalar in the environment forces the scalar
// table (useful for cross-machine byte-identical output). The two tables are
// not bit-identical: FMA contraction and lane-wise accumulation reorder the
// roundings, so equivalence is tested to a relative tolerance.

#include <cstddef>
#include <span>
#include <string_view>

namespace evotree::kernels {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  void (*scale)(double* a, double factor, std::size_t n);
  // out[i] = a[i] * b[i]
  void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
  // y = M x, M row-major rows x cols
  void (*gemv)(const double* m, const double* x, double* y, std::size_t rows, std::size_t cols);
  // sum_i |a[i] - b[i]|
  double (*l1_distance)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the build or the CPU has no AVX2+FMA.
const KernelTable* avx2_table();

Backend active_backend();
std::string_view backend_name(Backend b);
// Returns false if the requested backend is unavailable on this machine.
bool set_backend(Backend b);
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }
inline void scale(std::span<double> a, double factor) { active().scale(a.data(), factor, a.size()); }
inline void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  active().multiply(a.data(), b.data(), out.data(), a.size());
}
inline void gemv(std::span<const double> m, std::span<const double> x, std::span<double> y) {
  active().gemv(m.data(), x.data(), y.data(), y.size(), x.size());
}
inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  return active().l1_distance(a.data(), b.data(), a.size());
}

}  // namespace evotree::kernels
