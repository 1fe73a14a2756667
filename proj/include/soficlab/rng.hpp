#pragma once

#include <cstdint>
#include <random>

namespace soficlab {

// Mixes a parent seed with a stream index into an independent child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Deterministic generator; all randomness in the library flows through it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(derive_seed(seed, 0)) {}

  std::uint64_t seed() const { return seed_; }

  // Uniform in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

  bool coin() { return below(2) == 1; }

  Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream + 1)); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace soficlab
