#pragma once

#include <cstdint>
#include <random>

namespace loopi {

// Keeps substreams for different kinds of draws disjoint. The numeric tags
// are part of the reproducibility contract: changing them changes all draws.
enum class StreamPurpose : std::uint64_t {
  design = 1,      // l_i and v_ij draws for the training design
  response = 2,    // error vector u
  prediction = 3,  // fresh (x0, u0) pairs
  oracle = 4,      // Monte Carlo oracles (length, KS, ...)
  generic = 5,
};

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic substream keyed by (master seed, replication index, purpose).
// Draws depend only on the key and the call sequence within the stream, so
// worker count and scheduling cannot change results.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t replication,
            StreamPurpose purpose);

  std::uint64_t next_u64() { return engine_(); }

  double uniform01();  // [0, 1)
  double uniform(double a, double b);
  double normal();       // N(0, 1)
  double exponential();  // rate 1
  double rademacher();   // +-1 equiprobable
  double gamma(double shape);  // unit scale, shape >= 1
  double chi_squared(double df);
  double student_t(double df);

 private:
  std::mt19937_64 engine_;
};

}  // namespace loopi
