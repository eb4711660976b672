#include "idid/rng.hpp"

#include "idid/stats.hpp"

namespace idid {

namespace {
std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t state = a;
  std::uint64_t out = splitmix64(state);
  state ^= b + 0x632be59bd9b4e019ULL;
  out ^= splitmix64(state);
  state ^= c + 0x9e3779b97f4a7c15ULL;
  out ^= splitmix64(state);
  return out;
}

double Rng::uniform01() {
  // (k + 0.5) / 2^53 with k in [0, 2^53): strictly inside (0,1).
  const std::uint64_t k = engine_() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_quantile(uniform01()); }

int Rng::bernoulli(double p) { return uniform01() < p ? 1 : 0; }

}  // namespace idid
