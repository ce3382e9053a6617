#ifndef COPROTECTOR_RNG_H_
#define COPROTECTOR_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace coprotector {

// Seeded pseudo-random stream. Draws are implemented here rather than through
// <random> distributions so outputs are identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be positive.
  size_t Uniform(size_t bound);

  // Uniform real in [0, 1).
  double UniformReal();

  bool Bernoulli(double p) { return UniformReal() < p; }

  template <typename T>
  const T& Pick(const std::vector<T>& items) {
    return items[Uniform(items.size())];
  }

 private:
  std::mt19937_64 engine_;
};

uint64_t Fnv1a64(std::string_view bytes, uint64_t basis = 0xcbf29ce484222325ULL);

uint64_t SplitMix64(uint64_t x);

// Per-item seed derivation: seed = hash(global_seed, key).
uint64_t DeriveSeed(uint64_t global_seed, std::string_view key);

std::string HexId(uint64_t value);

// Lowercase ASCII word of the given length.
std::string RandomLowercaseWord(Rng& rng, size_t length);

}  // namespace coprotector

#endif  // COPROTECTOR_RNG_H_
