#include "dvqn/rng.hpp"

#include <cmath>
#include <numbers>

#include "dvqn/errors.hpp"

namespace dvqn {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {
std::uint64_t splitmix64_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace

int Rng::uniform_int(int n) {
  if (n <= 0) throw StructuralError("Rng::uniform_int: n must be positive");
  const std::uint64_t n64 = static_cast<std::uint64_t>(n);
  const std::uint64_t span = UINT64_MAX / n64;
  const std::uint64_t cut = span * n64;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= cut);
  return static_cast<int>(x / span);
}

double Rng::normal() {
  // u1 in (0, 1] so the log is finite.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::split(std::string_view stream) {
  return Rng(splitmix64_mix(next_u64() ^ fnv1a64(stream)));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64_mix(seed ^ splitmix64_mix(index + 0x51ed2701ull));
}

}  // namespace dvqn
