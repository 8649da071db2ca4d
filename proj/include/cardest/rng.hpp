#pragma once

#include <cstdint>
#include <random>

namespace cardest {

// Named substreams of a trial seed. Each component of a trial draws from its
// own stream so that, e.g., changing f does not perturb network placement.
enum class Stream : std::uint64_t {
  network = 1,
  protocol = 2,
  query = 3,
  network_retry = 4,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed of substream `stream` under `seed`.
std::uint64_t derive_seed(std::uint64_t seed, Stream stream) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) noexcept;

// Deterministic generator. The engine is std::mt19937_64 (fully specified by
// the standard); the conversions below are written out so that results are
// bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // True with probability p (p <= 0 never, p >= 1 always).
  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer on [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace cardest
