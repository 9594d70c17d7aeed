#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "melee/kernels.hpp"
#include "melee/rng.hpp"

using namespace melee;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -2.0,
                               double hi = 2.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

double abs_bound(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] * b[i]);
  return s;
}

}  // namespace

TEST_CASE("scalar dot matches a plain accumulation oracle") {
  Rng rng(7);
  for (std::size_t n : {0u, 1u, 3u, 17u, 64u}) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);
    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) expected += a[i] * b[i];
    CHECK(kernels::scalar::dot(a.data(), b.data(), n) ==
          doctest::Approx(expected).epsilon(1e-15));
  }
}

#if defined(MELEE_HAVE_AVX2_KERNELS)
TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return;
  Rng rng(11);
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u,
                        64u, 127u, 257u}) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);

    const double tol = 1e-12 * abs_bound(a, b);
    CHECK(std::fabs(kernels::avx2::dot(a.data(), b.data(), n) -
                    kernels::scalar::dot(a.data(), b.data(), n)) <= tol);
    CHECK(std::fabs(kernels::avx2::sum(a.data(), n) -
                    kernels::scalar::sum(a.data(), n)) <= tol);

    auto y1 = random_vec(rng, n);
    auto y2 = y1;
    const double alpha = rng.uniform(-3.0, 3.0);
    kernels::scalar::axpy(alpha, a.data(), y1.data(), n);
    kernels::avx2::axpy(alpha, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("avx2 matvec and ger agree with the scalar reference") {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return;
  Rng rng(13);
  const std::pair<std::size_t, std::size_t> shapes[] = {
      {1, 1}, {3, 5}, {4, 8}, {7, 13}, {16, 33}};
  for (auto [rows, cols] : shapes) {
    const auto m0 = random_vec(rng, rows * cols);
    const auto x = random_vec(rng, cols);
    const auto y = random_vec(rng, rows);

    std::vector<double> out1(rows), out2(rows);
    kernels::scalar::matvec(m0.data(), x.data(), out1.data(), rows, cols);
    kernels::avx2::matvec(m0.data(), x.data(), out2.data(), rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      CHECK(out1[r] == doctest::Approx(out2[r]).epsilon(1e-12));
    }

    auto m1 = m0;
    auto m2 = m0;
    kernels::scalar::ger(0.5, y.data(), x.data(), m1.data(), rows, cols);
    kernels::avx2::ger(0.5, y.data(), x.data(), m2.data(), rows, cols);
    for (std::size_t i = 0; i < m1.size(); ++i) {
      CHECK(m1[i] == doctest::Approx(m2[i]).epsilon(1e-12));
    }
  }
}
#endif

TEST_CASE("dispatched kernels match the active variant") {
  Rng rng(17);
  const auto a = random_vec(rng, 37);
  const auto b = random_vec(rng, 37);
  const double got = kernels::dot(a.data(), b.data(), a.size());
  if (kernels::active() == kernels::Isa::scalar) {
    CHECK(got == kernels::scalar::dot(a.data(), b.data(), a.size()));
  }
#if defined(MELEE_HAVE_AVX2_KERNELS)
  if (kernels::active() == kernels::Isa::avx2) {
    CHECK(got == kernels::avx2::dot(a.data(), b.data(), a.size()));
  }
#endif
  CHECK((kernels::isa_name(kernels::active()) == "scalar" ||
         kernels::isa_name(kernels::active()) == "avx2"));
}

TEST_CASE("dot is bilinear") {
  Rng rng(23);
  const std::size_t n = 29;
  const auto a = random_vec(rng, n);
  const auto b = random_vec(rng, n);
  const auto c = random_vec(rng, n);
  std::vector<double> bc(n);
  for (std::size_t i = 0; i < n; ++i) bc[i] = 2.0 * b[i] - 0.5 * c[i];
  const double lhs = kernels::dot(a.data(), bc.data(), n);
  const double rhs = 2.0 * kernels::dot(a.data(), b.data(), n) -
                     0.5 * kernels::dot(a.data(), c.data(), n);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}
