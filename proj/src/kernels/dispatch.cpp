#include <atomic>
#include <cstdlib>
#include <string>

#include "xling/error.hpp"
#include "xling/kernels.hpp"

namespace xling::kernels {

namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);

struct Table {
  Backend backend;
  DotFn dot;
  AxpyFn axpy;
};

constexpr Table kScalar{Backend::scalar, &scalar::dot, &scalar::axpy};
#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2{Backend::avx2, &avx2::dot, &avx2::axpy};
#endif
#if defined(__aarch64__)
constexpr Table kNeon{Backend::neon, &neon::dot, &neon::axpy};
#endif

const Table* table_for(Backend b) {
  switch (b) {
    case Backend::scalar:
      return &kScalar;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return &kAvx2;
#else
      return nullptr;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return &kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const Table* initial_table() {
  Backend b = best_available();
  if (const char* env = std::getenv("XLING_KERNELS")) {
    Backend requested;
    if (backend_from_name(env, requested) && supported(requested)) b = requested;
  }
  return table_for(b);
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> t{initial_table()};
  return t;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

bool backend_from_name(std::string_view name, Backend& out) {
  for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
    if (backend_name(b) == name) {
      out = b;
      return true;
    }
  }
  return false;
}

bool supported(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend best_available() {
  if (supported(Backend::avx2)) return Backend::avx2;
  if (supported(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

Backend active() { return current().load(std::memory_order_relaxed)->backend; }

void select(Backend b) {
  if (!supported(b)) {
    throw FormatError("kernel backend '" + std::string(backend_name(b)) +
                      "' is not available on this machine");
  }
  current().store(table_for(b), std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw FormatError("dot: size mismatch");
  return current().load(std::memory_order_relaxed)->dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw FormatError("axpy: size mismatch");
  current().load(std::memory_order_relaxed)->axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace xling::kernels
