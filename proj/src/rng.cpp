#include "loopi/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace loopi {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t replication,
                     StreamPurpose purpose) {
  std::uint64_t key = splitmix64(master_seed);
  key = splitmix64(key ^ (replication + 0x632be59bd9b4e019ULL));
  key = splitmix64(key ^ static_cast<std::uint64_t>(purpose) * 0xff51afd7ed558ccdULL);
  engine_.seed(key);
  engine_.discard(16);
}

double RngStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double a, double b) {
  return a + (b - a) * uniform01();
}

double RngStream::normal() {
  // Box-Muller, fixed two uniforms per draw so stream offsets are predictable.
  const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::exponential() { return -std::log(1.0 - uniform01()); }

double RngStream::rademacher() {
  return (engine_() >> 63) ? 1.0 : -1.0;
}

double RngStream::gamma(double shape) {
  // Marsaglia-Tsang; callers guarantee shape >= 1.
  if (shape < 1.0) throw std::invalid_argument("gamma: shape must be >= 1");
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v;
  }
}

double RngStream::chi_squared(double df) { return 2.0 * gamma(df / 2.0); }

double RngStream::student_t(double df) {
  const double z = normal();
  const double w = chi_squared(df);
  return z / std::sqrt(w / df);
}

}  // namespace loopi
