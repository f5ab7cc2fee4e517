#pragma once

#include <span>
#include <string_view>

// Arithmetic inner loops shared by the alignment and network code.
//
// Every kernel has a scalar reference implementation plus optional SIMD
// variants. The variant is chosen once at startup from the CPU's
// capabilities and may be overridden (tests compare variants against the
// reference; the XLING_KERNELS environment variable forces one). All
// variants are deterministic; they differ from the reference only by
// floating-point reassociation.

namespace xling::kernels {

enum class Backend { scalar, avx2, neon };

std::string_view backend_name(Backend b);
bool backend_from_name(std::string_view name, Backend& out);

/// Whether this binary carries `b` and the running CPU can execute it.
bool supported(Backend b);

/// Currently dispatched backend.
Backend active();

/// Switch dispatch. Throws FormatError if `b` is not supported here.
void select(Backend b);

/// Highest-throughput supported backend.
Backend best_available();

/// Sum of a[i]*b[i]. Sizes must match.
double dot(std::span<const double> a, std::span<const double> b);

/// y[i] += alpha * x[i].
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// RAII override used by tests and benchmarks.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b) : previous_(active()) { select(b); }
  ~ScopedBackend() { select(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace neon
#endif

}  // namespace xling::kernels
