#pragma once

#include "iat/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace iat {

// splitmix64, used to derive independent stream seeds from one master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seeded generator with hand-rolled distributions on top of mt19937_64.
// mt19937_64 output is pinned by the standard and every distribution here is
// written out explicitly, so identical seeds give identical streams on any
// platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  // [0, 1)
  Real uniform() { return static_cast<Real>(engine_() >> 11) * 0x1.0p-53; }

  Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; second deviate cached
  Real gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const Real u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const Real u2 = uniform();
    const Real radius = std::sqrt(-2.0 * std::log(u1));
    const Real angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  Vec gaussian_vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = gaussian();
    return v;
  }

  Mat gaussian_mat(int rows, int cols) {
    Mat m(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = gaussian();
    return m;
  }

  // [0, n)
  int uniform_int(int n) { return static_cast<int>(uniform() * n) % n; }

  // index drawn proportionally to nonnegative weights (need not be normalized)
  int categorical(const Vec& weights) {
    const Real total = weights.sum();
    Real u = uniform() * total;
    for (int i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u <= 0) return i;
    }
    return static_cast<int>(weights.size()) - 1;
  }

  // Fisher-Yates
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      const int j = uniform_int(i + 1);
      std::swap(v[i], v[j]);
    }
  }

  // independent child stream; a function of the construction seed only, so
  // stage seeds do not depend on how much of the parent stream was consumed
  Rng fork(std::uint64_t stream) const { return Rng(mix_seed(seed_, stream)); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  Real spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace iat
