#ifndef PAXRL_RNG_HPP
#define PAXRL_RNG_HPP

#include <cstdint>

namespace pax {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derives an independent seed for one named RNG stream (network init,
// environment, exploration, replay sampling, evaluation, ...) from the run
// seed. Streams stay decorrelated even for small or equal base seeds.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base ^ (0xA0761D6478BD642Full * (stream + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

namespace stream {
inline constexpr std::uint64_t kActorInit = 1;
inline constexpr std::uint64_t kCriticInit = 2;
inline constexpr std::uint64_t kEnv = 3;
inline constexpr std::uint64_t kExplore = 4;
inline constexpr std::uint64_t kReplay = 5;
inline constexpr std::uint64_t kEvalBase = 100;
}  // namespace stream

}  // namespace pax

#endif
