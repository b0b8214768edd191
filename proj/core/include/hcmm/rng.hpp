#pragma once

#include <cstdint>
#include <random>

namespace hcmm {

// Seedable generator with derivable, draw-independent substreams.
//
// Engine: std::mt19937_64. A generator is identified by (seed, stream); its
// engine is seeded with splitmix64(seed ^ splitmix64(stream)). Uniform doubles
// take the top 53 bits of one engine output, so u lies in [0, 1) and the
// stream of values is identical on every platform. substream(id) depends only
// on the identity of the parent, never on how many values it has produced.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  Rng substream(std::uint64_t id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // [0, 1), 53-bit resolution.
  double uniform();
  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  // Standard normal.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  // UniformRandomBitGenerator interface for <random> distributions.
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace hcmm
