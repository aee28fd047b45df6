#ifndef IP3O_RNG_H_
#define IP3O_RNG_H_

#include <cstdint>
#include <random>

namespace ip3o {

// Independent randomness streams derived from one master seed. Each consumer
// draws from its own stream so that enabling or disabling one component does
// not shift the draws seen by the others.
enum class Stream : std::uint64_t {
  kEnv = 1,
  kPolicyInit = 2,
  kCriticInit = 3,
  kActions = 4,
  kShuffle = 5,
  kEval = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based split: (master, stream, counter) -> 64-bit seed.
inline std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                 std::uint64_t counter = 0) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL));
  return splitmix64(h ^ (counter * 0x8CB92BA72F3D8DD7ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, Stream stream,
                    std::uint64_t counter = 0) {
  return Rng(derive_seed(master, stream, counter));
}

}  // namespace ip3o

#endif  // IP3O_RNG_H_
