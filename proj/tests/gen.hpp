#pragma once

// Small seeded generators for property tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hetsim/random.hpp"

namespace gen {

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(hetsim::mix_seed(seed)) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * hetsim::uniform01(eng); }
  int integer(int lo, int hi) { return lo + static_cast<int>(hetsim::uniform_index(eng, static_cast<std::uint64_t>(hi - lo + 1))); }
  bool coin() { return integer(0, 1) == 1; }

  std::vector<double> doubles(int n, double lo, double hi) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

  template <class T>
  const T& pick(const std::vector<T>& v) { return v[hetsim::uniform_index(eng, v.size())]; }
};

inline const std::vector<std::string>& duties() {
  static const std::vector<std::string> d{"1/8", "2/8", "3/8", "3/20", "1/2"};
  return d;
}

}  // namespace gen
