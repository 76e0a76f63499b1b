#include "stage/num/rng.hpp"

#include <cmath>
#include <numbers>

namespace stage::num {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                          std::uint64_t a, std::uint64_t b) {
  // FNV-1a over the tag, then splitmix finalizers to decorrelate indices.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  h = splitmix64(h ^ splitmix64(base));
  h = splitmix64(h ^ splitmix64(a + 0x51ed2701ull));
  h = splitmix64(h ^ splitmix64(b + 0x2545f491ull));
  return h;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  // rejection sampling to avoid modulo bias
  const std::uint64_t limit = n * (UINT64_MAX / n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  // 1 - uniform() keeps the log argument strictly positive
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace stage::num
