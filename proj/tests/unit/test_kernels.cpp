#include <doctest.h>

#include <cmath>

#include "xling/kernels.hpp"
#include "xling/rng.hpp"

using namespace xling;
using namespace xling::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.gaussian();
  return v;
}

std::vector<Backend> simd_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::avx2, Backend::neon}) {
    if (supported(b)) out.push_back(b);
  }
  return out;
}

}  // namespace

TEST_CASE("scalar dot and axpy against hand values") {
  std::vector<double> a{1, 2, 3}, b{4, -5, 6};
  CHECK(scalar::dot(a.data(), b.data(), 3) == 12.0);
  std::vector<double> y{1, 1, 1};
  scalar::axpy(2.0, a.data(), y.data(), 3);
  CHECK(y == std::vector<double>{3, 5, 7});
  CHECK(scalar::dot(a.data(), b.data(), 0) == 0.0);
}

TEST_CASE("SIMD kernels agree with the scalar reference") {
  for (Backend b : simd_backends()) {
    CAPTURE(backend_name(b));
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 16u, 17u, 300u, 1001u}) {
      CAPTURE(n);
      auto x = random_vector(n, 10 + n);
      auto y = random_vector(n, 20 + n);
      const double ref = scalar::dot(x.data(), y.data(), n);
      double bound = 0.0;
      for (std::size_t i = 0; i < n; ++i) bound += std::abs(x[i] * y[i]);
      double got = 0.0;
      {
        ScopedBackend scope(b);
        got = dot(x, y);
      }
      CHECK(std::abs(got - ref) <= 1e-14 * (bound + 1.0));

      auto y_ref = y, y_simd = y;
      scalar::axpy(0.37, x.data(), y_ref.data(), n);
      {
        ScopedBackend scope(b);
        axpy(0.37, x, y_simd);
      }
      for (std::size_t i = 0; i < n; ++i) CHECK(y_simd[i] == doctest::Approx(y_ref[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("backend selection") {
  CHECK(supported(Backend::scalar));
  CHECK(supported(best_available()));
  Backend parsed;
  CHECK(backend_from_name("scalar", parsed));
  CHECK(parsed == Backend::scalar);
  CHECK_FALSE(backend_from_name("sse9", parsed));
  const Backend before = active();
  {
    ScopedBackend scope(Backend::scalar);
    CHECK(active() == Backend::scalar);
  }
  CHECK(active() == before);
}

TEST_CASE("dispatch is deterministic for a fixed backend") {
  auto x = random_vector(513, 1);
  auto y = random_vector(513, 2);
  const double first = dot(x, y);
  for (int i = 0; i < 5; ++i) CHECK(dot(x, y) == first);
}
