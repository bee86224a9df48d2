// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace ibvo {

/// Counter-based generator: the i-th draw is a pure function of (key, i).
///
/// Keys for independent streams are derived with `derive(seed, {purpose,
/// index, ...})`, so output never depends on the order in which streams are
/// consumed or on how many workers consume them. Normal draws use Box-Muller
/// with no cached second value; the full state is (key, counter).
class Rng {
 public:
  explicit Rng(std::uint64_t key = 0, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

  static std::uint64_t mix(std::uint64_t x);
  static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  /// Independent child stream.
  Rng stream(std::uint64_t id) const { return Rng(derive(key_, {id})); }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::vector<double> normals(std::size_t n, double stddev = 1.0);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  bool operator==(const Rng&) const = default;

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// Stream purposes used across the project.
enum class StreamPurpose : std::uint64_t {
  kTrajectory = 1,
  kNuisance = 2,
  kVisNoise = 3,
  kImuNoise = 4,
  kSensorModel = 5,
  kDegrade = 6,
  kInit = 7,
  kShuffle = 8,
  kClipNoise = 9,
  kProbe = 10,
  kChain = 11,
  kEval = 12,
};

inline std::uint64_t purpose(StreamPurpose p) { return static_cast<std::uint64_t>(p); }

}  // namespace ibvo
