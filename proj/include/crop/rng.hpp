#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace crop {

// Hand-rolled splitmix64 generator. Results must be reproducible from a single
// integer seed and must not depend on the standard library's distribution
// implementations, so everything downstream of a seed goes through this.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], both inclusive. Multiply-shift reduction;
  // the bias is on the order of (hi-lo)/2^64.
  int uniform_int(int lo, int hi) {
    const uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    const auto wide = static_cast<unsigned __int128>(next_u64()) * range;
    return lo + static_cast<int>(wide >> 64);
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Index drawn according to `probs` (assumed to sum to 1).
  int categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    for (size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Fans one run seed out into independent named streams (init, env, action
// sampling, evaluation, ...). A stream is identified by a small tag plus an
// optional index, mixed through one splitmix64 round each.
inline uint64_t derive_seed(uint64_t base, uint64_t tag, uint64_t index = 0) {
  Rng mix(base ^ (tag * 0x9e3779b97f4a7c15ULL));
  const uint64_t first = mix.next_u64();
  Rng mix2(first ^ (index * 0xbf58476d1ce4e5b9ULL));
  return mix2.next_u64();
}

// Stream tags used by the training harness.
namespace seed_tag {
constexpr uint64_t kInit = 1;     // network initialization
constexpr uint64_t kAction = 2;   // per-env action sampling
constexpr uint64_t kPool = 3;     // per-env pool layout draws
constexpr uint64_t kRad = 4;      // per-env RAD augmentation
constexpr uint64_t kEval = 5;     // periodic evaluation episodes
constexpr uint64_t kShuffle = 6;  // minibatch shuffling
}  // namespace seed_tag

}  // namespace crop
