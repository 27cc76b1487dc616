#pragma once
// Counter-style deterministic RNG with independent (seed, stream) lanes.
//
// Core generator is splitmix64: the state walks a fixed odd increment and
// each output is a finalizer hash of the state, so a stream is a pure
// function of (seed, stream, counter). Uniforms and normals are derived
// here by hand (53-bit mantissa uniform, Box-Muller normal) instead of
// <random> distributions, whose output is implementation-defined and
// would break byte-identical reruns across standard libraries.

#include <cmath>
#include <cstdint>

namespace rffkit {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}
} // namespace detail

class RngStream {
public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(detail::mix64(seed + 0x9e3779b97f4a7c15ULL) ^
               detail::mix64(~stream * 0xda942042e4dd58b5ULL)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return detail::mix64(state_);
  }

  // uniform on [0,1), 53 random bits
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform on (0,1], safe as a log argument
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // standard normal via Box-Muller; pairs are cached
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double r = std::sqrt(-2.0 * std::log(uniform_open()));
    double t = 6.283185307179586476925287 * uniform();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace rffkit
