#include "hcmm/rng.hpp"

#include <stdexcept>

namespace hcmm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(splitmix64(seed ^ splitmix64(stream))) {}

Rng Rng::substream(std::uint64_t id) const {
  // Child seed folds the full parent identity so grandchildren stay distinct.
  return Rng(splitmix64(seed_ ^ splitmix64(stream_ + 0x632be59bd9b4e019ULL)), id);
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: n must be > 0");
  // Rejection keeps the result unbiased and portable.
  const std::uint64_t limit = max() - (max() % n);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

double Rng::normal() { return normal_(*this); }

}  // namespace hcmm
