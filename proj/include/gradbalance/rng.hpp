#ifndef GRADBALANCE_RNG_HPP_
#define GRADBALANCE_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

namespace gradbalance {

// xoshiro256++ seeded through splitmix64. Small state, fully owned by the
// caller, bit-identical sequences for a given (seed, stream) on every run
// of the same build. Streams let independent consumers (init, batches,
// combiner noise, ...) share one user-facing seed without coupling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    for (auto& s : state_) s = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller, one spare cached
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream ids used across the library so independent consumers never share
// a sequence.
namespace streams {
inline constexpr std::uint64_t kModelInit = 1;
inline constexpr std::uint64_t kBatchSampling = 2;
inline constexpr std::uint64_t kCombiner = 3;
inline constexpr std::uint64_t kDataInputs = 4;
inline constexpr std::uint64_t kDataMaps = 5;
inline constexpr std::uint64_t kDataNoise = 6;
inline constexpr std::uint64_t kCorruption = 7;
inline constexpr std::uint64_t kSubsample = 8;
}  // namespace streams

}  // namespace gradbalance

#endif  // GRADBALANCE_RNG_HPP_
