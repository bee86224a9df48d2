// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ibvo/rng.hpp"

#include <cmath>
#include <numbers>

namespace ibvo {

std::uint64_t Rng::mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t k = mix(seed ^ 0x5DEECE66DULL);
  for (auto p : path) k = mix(k ^ mix(p + 0x632BE59BD9B4E019ULL));
  return k;
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t c = counter_++;
  return mix(key_ ^ mix(c));
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x < limit) return x % n;
  }
}

std::vector<double> Rng::normals(std::size_t n, double stddev) {
  std::vector<double> out(n);
  for (auto& x : out) x = stddev * normal();
  return out;
}

}  // namespace ibvo
