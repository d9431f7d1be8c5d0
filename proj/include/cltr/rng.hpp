#ifndef CLTR_RNG_HPP
#define CLTR_RNG_HPP

#include <cmath>
#include <cstdint>

namespace cltr {

// Counter-based generator (splitmix64): the output is a hash of an
// incrementing counter, so substreams can be derived by hashing a
// (seed, stream index) pair without any state cross-talk.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // One substream per stream index; used e.g. for per-session click streams.
  static Rng substream(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix64(seed ^ mix64(index + 0x51ed2701a3c5e491ULL)));
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform index in [0, n); consumes exactly one draw
  int next_index(int n) {
    int i = static_cast<int>(next_double() * n);
    return i >= n ? n - 1 : i;
  }

  // standard normal via Box-Muller; consumes exactly two draws
  double next_gaussian() {
    double u1 = 1.0 - next_double();  // (0, 1]
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace cltr

#endif  // CLTR_RNG_HPP
