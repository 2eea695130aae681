#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace afg {

// SplitMix64 (Steele, Lea & Flood 2014): 64-bit state, increment
// 0x9E3779B97F4A7C15, output mixer with shifts 30/27/31. Every source of
// randomness in the pipeline (splits, batching, initialization, fixtures)
// goes through this generator so results are reproducible bit-for-bit on
// any platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound). Plain modulo reduction: the bias is below
  // 2^-40 for every bound used here and the rule is trivial to reimplement.
  std::uint64_t below(std::uint64_t bound) noexcept { return next() % bound; }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

// Derive an independent stream seed from a root seed and a label.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) noexcept {
  SplitMix64 g(root ^ (stream * 0xD1B54A32D192ED03ULL));
  return g.next();
}

// Fisher-Yates, walking from the back: for i = n-1 .. 1 swap(i, below(i+1)).
template <typename T>
void shuffle(std::span<T> items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace afg
