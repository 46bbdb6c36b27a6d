// Copyright (c) the rbcsim authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace rbc {

// Deterministic, splittable PRNG (xoshiro256** seeded via splitmix64).
// Simulation results must be reproducible from (seed, config) on any
// platform, so no std:: distributions are used anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  // Independent child stream; stable under reordering of split calls.
  Rng split(std::uint64_t stream) const {
    std::uint64_t h = seed_ ^ (0x9e3779b97f4a7c15ULL * (stream + 0x632be59bd9b4e019ULL));
    std::uint64_t x = h;
    return Rng(splitmix64(x) ^ (stream << 1 | 1));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0,1) with 53 random bits
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  int bit() { return static_cast<int>(next_u64() >> 63); }

  // Poisson via CDF inversion. Valid for any mean: means above the
  // inversion cutoff are split into chunks and summed (Poisson additivity).
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    constexpr double kCutoff = 10.0;
    if (mean <= kCutoff) return poisson_invert(mean);
    long chunks = static_cast<long>(mean / kCutoff) + 1;
    double part = mean / static_cast<double>(chunks);
    long total = 0;
    for (long i = 0; i < chunks; ++i) total += poisson_invert(part);
    return total;
  }

  long binomial(long n, double p) {
    long k = 0;
    for (long i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  long poisson_invert(double mean) {
    double u = uniform01();
    double pmf = std::exp(-mean);
    double cum = pmf;
    long k = 0;
    while (u > cum && k < 20000) {
      ++k;
      pmf *= mean / static_cast<double>(k);
      cum += pmf;
    }
    return k;
  }

  std::uint64_t seed_;
  std::uint64_t s_[4];
};

}  // namespace rbc
