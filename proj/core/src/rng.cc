#include "coprotector/rng.h"

#include <cstdio>

namespace coprotector {

size_t Rng::Uniform(size_t bound) {
  // Rejection sampling removes modulo bias.
  const uint64_t b = static_cast<uint64_t>(bound);
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % b);
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<size_t>(x % b);
}

double Rng::UniformReal() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

uint64_t Fnv1a64(std::string_view bytes, uint64_t basis) {
  uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t DeriveSeed(uint64_t global_seed, std::string_view key) {
  return SplitMix64(global_seed ^ Fnv1a64(key));
}

std::string HexId(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::string RandomLowercaseWord(Rng& rng, size_t length) {
  std::string word(length, 'a');
  for (char& c : word) c = static_cast<char>('a' + rng.Uniform(26));
  return word;
}

}  // namespace coprotector
