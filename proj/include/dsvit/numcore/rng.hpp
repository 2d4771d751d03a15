#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace dsvit::num {

// splitmix64 finalizer over a pair; used to derive per-subject and per-sample
// seeds so any parallel schedule sees the same streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

// Deterministic random source. Distributions are implemented here rather than
// with <random> distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool coin(double p_true = 0.5) { return uniform() < p_true; }
  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t n);
  double normal();
  double normal(double mean, double std) { return mean + std * normal(); }

  template <typename V>
  void shuffle(std::vector<V>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dsvit::num
