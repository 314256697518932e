#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace symqmp {

// Deterministic Gaussian source.  mt19937_64 output is fully specified by the
// standard; std::normal_distribution is not, so normals come from Box-Muller to
// keep results byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // seed of the independent stream derived from a master seed (splitmix64
  // mixing); exposed so callers can record per-stream seeds for replay
  static std::uint64_t stream_seed(std::uint64_t master, std::uint64_t idx) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (idx + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static Rng stream(std::uint64_t master, std::uint64_t idx) {
    return Rng(stream_seed(master, idx));
  }

  double uniform() {
    // 53-bit mantissa in [0,1)
    return (eng_() >> 11) * 0x1.0p-53;
  }

  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::complex<double> cgauss() {
    double re = gauss();
    double im = gauss();
    return {re, im};
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace symqmp
