#pragma once

#include <cstdint>
#include <random>

namespace mbdtraj {

// Stream tags keep the draws of different consumers apart for a shared seed.
enum class StreamTag : std::uint64_t {
  kDiffusionInit = 1,
  kDiffusionSample = 2,
  kRandomSearch = 3,
  kCem = 4,
};

constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of the generator owning draw (step, index) of a tagged stream. Every
// sample owns its generator, so results never depend on which thread draws it.
constexpr std::uint64_t DeriveSeed(std::uint64_t seed, StreamTag tag, std::uint64_t step,
                                   std::uint64_t index) {
  std::uint64_t h = SplitMix64(seed);
  h = SplitMix64(h ^ static_cast<std::uint64_t>(tag));
  h = SplitMix64(h ^ step);
  return SplitMix64(h ^ index);
}

class SampleRng {
 public:
  SampleRng(std::uint64_t seed, StreamTag tag, std::uint64_t step, std::uint64_t index)
      : engine_(DeriveSeed(seed, tag, step, index)) {}

  double Normal() { return normal_(engine_); }
  double Uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace mbdtraj
