#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dgmsm {

// Seeded random stream with a frozen variate pipeline so that a seed fully
// determines every draw on any conforming platform:
//   - engine: std::mt19937_64 (output sequence fixed by the standard)
//   - uniform: top 53 bits of one engine output, scaled to [0, 1)
//   - normal: Box–Muller, both variates of a pair are used in order
// None of the std distributions are used since their algorithms are
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal();
  std::size_t index(std::size_t n);
  /// Draws an index with probability proportional to weights (need not sum to 1).
  std::size_t categorical(std::span<const double> weights);
  void shuffle(std::vector<std::size_t>& items);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive independent seeds from one base seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(seed ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// 64-bit FNV-1a over raw bytes.
class Fnv1a {
 public:
  void update(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= bytes[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace dgmsm
