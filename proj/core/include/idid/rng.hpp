#pragma once

#include <cstdint>
#include <random>

namespace idid {

// Mixes seed components into one engine seed (splitmix64 chain). Used to
// derive independent streams, e.g. per replicate or per search restart.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

// Deterministic random source. std::mt19937_64 drives it, but all variate
// transforms are implemented here so output does not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on (0,1): 53 mantissa bits, never exactly 0 or 1.
  double uniform01();

  // Standard normal by inverse CDF.
  double normal();

  int bernoulli(double p);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace idid
