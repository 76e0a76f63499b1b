#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace stage::num {

// Derives an independent stream seed from a base seed, a purpose tag and
// up to two indices (round, client, ...). All randomness in the simulator
// flows through this so parallel and serial schedules agree bit for bit.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                          std::uint64_t a = 0, std::uint64_t b = 0);

// mt19937_64 with hand-rolled distributions; <random> distributions are
// implementation-defined and would break the determinism contract.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // uniform integer in [0, n)
  std::uint64_t uniform_int(std::uint64_t n);

  // standard normal via Box-Muller, one value per call, no cached state
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_int(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace stage::num
