#pragma once

#include <cstddef>
#include <string>

// Dense double-precision kernels behind the linear scorers, LinUCB and the
// Banditron update. A scalar reference implementation always exists; on
// x86-64 an AVX2+FMA variant is compiled into a separate translation unit
// and selected at runtime. Set MELEE_SIMD=scalar (or avx2/auto) to override
// detection. Both paths are equivalence-tested against each other.
namespace melee::kernels {

enum class Isa { scalar, avx2 };

// The instruction set the dispatched entry points are bound to.
Isa active();
std::string isa_name(Isa isa);

// Dispatched entry points.
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
double sum(const double* a, std::size_t n);
// Row-major m (rows x cols): out[r] = m[r,:] . x
void matvec(const double* m, const double* x, double* out, std::size_t rows,
            std::size_t cols);
// Row-major rank-one update: m += alpha * x * y^T
void ger(double alpha, const double* x, const double* y, double* m,
         std::size_t rows, std::size_t cols);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
void matvec(const double* m, const double* x, double* out, std::size_t rows,
            std::size_t cols);
void ger(double alpha, const double* x, const double* y, double* m,
         std::size_t rows, std::size_t cols);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define MELEE_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
void matvec(const double* m, const double* x, double* out, std::size_t rows,
            std::size_t cols);
void ger(double alpha, const double* x, const double* y, double* m,
         std::size_t rows, std::size_t cols);
}  // namespace avx2
#endif

}  // namespace melee::kernels
