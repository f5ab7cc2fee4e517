#include "xling/rng.hpp"

#include <cmath>
#include <numbers>

namespace xling {

double counter_gaussian(std::uint64_t key) {
  // Box-Muller over two independent hashes of the key.
  double u1 = to_unit(mix64(key ^ 0x5851f42d4c957f2dULL));
  double u2 = to_unit(mix64(key ^ 0x14057b7ef767814fULL));
  u1 = 1.0 - u1;  // (0, 1]
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

}  // namespace xling
