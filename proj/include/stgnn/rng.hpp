// Seeding and random draws.
//
// Every experiment owns a single root seed. Seeds for individual draws are
// derived through a splittable counter scheme,
//
//   derived = mix(mix(root ^ mix(stream)) ^ index),
//
// where mix is the SplitMix64 finalizer. Distinct (stream, index) pairs give
// independent engines, so runs are bit-reproducible regardless of how work is
// partitioned across threads.
//
// Uniform doubles are produced from the top 53 bits of a mt19937_64 draw,
// which pins the byte-level output of every sampler to the engine alone.
#pragma once

#include <cstdint>
#include <random>

namespace stgnn {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                                           std::uint64_t index) {
  return splitmix64(splitmix64(root ^ splitmix64(stream)) ^ index);
}

// Stream tags for derive_seed. Each independent consumer of randomness in a
// run gets its own stream so draw counts never interact.
namespace seed_stream {
inline constexpr std::uint64_t res_draw = 1;
inline constexpr std::uint64_t dataset = 2;
inline constexpr std::uint64_t model_init = 3;
inline constexpr std::uint64_t sweep_trial = 4;
inline constexpr std::uint64_t sweep_size = 5;
inline constexpr std::uint64_t rollout_step = 6;
inline constexpr std::uint64_t grid_probe = 7;
}  // namespace seed_stream

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double canonical() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * canonical(); }

  bool bernoulli(double p) { return canonical() < p; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace stgnn
