#include "melee/kernels.hpp"

#include <cstdlib>

namespace melee::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

void matvec(const double* m, const double* x, double* out, std::size_t rows,
            std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot(m + r * cols, x, cols);
}

void ger(double alpha, const double* x, const double* y, double* m,
         std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(alpha * x[r], y, m + r * cols, cols);
}

}  // namespace scalar

namespace {

bool avx2_available() {
#if defined(MELEE_HAVE_AVX2_KERNELS)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa choose_isa() {
  if (const char* env = std::getenv("MELEE_SIMD")) {
    std::string mode(env);
    if (mode == "scalar") return Isa::scalar;
    if (mode == "avx2" && avx2_available()) return Isa::avx2;
    // anything else (including "auto") falls through to detection
  }
  return avx2_available() ? Isa::avx2 : Isa::scalar;
}

const Isa g_isa = choose_isa();

}  // namespace

Isa active() { return g_isa; }

std::string isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

#if defined(MELEE_HAVE_AVX2_KERNELS)
#define MELEE_DISPATCH(fn, ...) \
  (g_isa == Isa::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define MELEE_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(const double* a, const double* b, std::size_t n) {
  return MELEE_DISPATCH(dot, a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  MELEE_DISPATCH(axpy, alpha, x, y, n);
}

double sum(const double* a, std::size_t n) { return MELEE_DISPATCH(sum, a, n); }

void matvec(const double* m, const double* x, double* out, std::size_t rows,
            std::size_t cols) {
  MELEE_DISPATCH(matvec, m, x, out, rows, cols);
}

void ger(double alpha, const double* x, const double* y, double* m,
         std::size_t rows, std::size_t cols) {
  MELEE_DISPATCH(ger, alpha, x, y, m, rows, cols);
}

#undef MELEE_DISPATCH

}  // namespace melee::kernels
