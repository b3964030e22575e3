#pragma once

#include <cstdint>
#include <string_view>

namespace gansemble {

// Counter-based pseudo-random generator (SplitMix64). The n-th output is a
// pure function of (seed, n), so streams can be split by deriving new seeds
// instead of sharing generator state. All sampling in this project goes
// through this class; std:: distributions are avoided because their output
// is not reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double next_double();

  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; generates pairs, caches the spare.
  double normal();

  // Unbiased integer in [0, n), n > 0.
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream derivation rule: seed(master, purpose, a, b) mixes the master seed,
// a purpose label, and up to two indices through the SplitMix64 finalizer.
// Every independent sampling task derives its own stream with a distinct
// (purpose, index) pair, so parallel scheduling never changes results.
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                          std::uint64_t a = 0, std::uint64_t b = 0);

// SplitMix64 finalizer, exposed for hashing small fixed-size inputs.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a over arbitrary bytes; used for config/content hashing.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace gansemble
