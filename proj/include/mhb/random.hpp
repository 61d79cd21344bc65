#pragma once

#include <cstdint>
#include <random>

namespace mhb {

/// Seeded pseudo-random stream. Owns its engine; pass by value or by
/// exclusive reference, never share between concurrent tasks.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);
  RandomStream(std::uint64_t master, std::uint64_t index);

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) built from the top 53 bits, so the value is
  /// identical across standard library implementations.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Independent stream for trial `index` under `master`. The engine is
/// seeded from the 128-bit key (master, index) through std::seed_seq, so
/// the stream depends only on that pair and never on scheduling.
RandomStream seed_stream(std::uint64_t master, std::uint64_t index);

/// Deterministic 64-bit seed recorded alongside a trial.
std::uint64_t derived_seed(std::uint64_t master, std::uint64_t index);

}  // namespace mhb
