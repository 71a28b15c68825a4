#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "polecraft/matcore.hpp"

namespace polecraft {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Decorrelated child seed for a numbered stream of one master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t state = master + stream * 0x9e3779b97f4a7c15ULL;
  return splitmix64(state);
}

// Deterministic standard-normal source: mt19937_64 feeding a Box-Muller
// transform on 53-bit uniforms, one cached spare per pair of draws.  The
// exact construction is documented in the README so streams can be
// reproduced outside this codebase.
class NormalRng {
 public:
  explicit NormalRng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log1p(-u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  RealVector randn_vector(Eigen::Index n) {
    RealVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  // Row-major fill so the stream layout is unambiguous.
  RealMatrix randn(Eigen::Index rows, Eigen::Index cols) {
    RealMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace polecraft
