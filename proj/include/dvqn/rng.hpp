#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dvqn {

std::uint64_t fnv1a64(std::string_view s);

// Seeded deterministic generator. The engine is std::mt19937_64 (fully
// specified by the standard); all value transforms are implemented here so
// that output sequences are identical across platforms. `split` derives an
// independent named stream from the current state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n), unbiased via rejection.
  int uniform_int(int n);

  // Standard normal via Box-Muller (no internal cache).
  double normal();

  Rng split(std::string_view stream);

 private:
  std::mt19937_64 engine_;
};

// Pure mix of (seed, index) into a fresh stream seed; used to derive
// per-trial seeds without touching shared state.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace dvqn
