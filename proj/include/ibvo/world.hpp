// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic odometry world.
//
// Each sequence carries a visual channel that mixes a fixed nonlinear
// embedding of the relative pose with a per-sequence nuisance code, and an
// IMU channel synthesized from the same motion with independent noise:
//
//   vis[t]        = W1 * phi(normalize(xi_t)) + W2 * nuisance + eps_t
//   imu[t][k]     = (gyro, accel) at substep k of frame-pair t, plus noise
//
// phi, W1 and W2 depend only on (profile, family_seed), so every sequence of a
// world family shares one sensor model. Random streams are keyed by (seed,
// sequence index, purpose), which makes generation order-independent.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ibvo/se3.hpp"

namespace ibvo {

enum class Profile { kCar, kMav, kStatic };

std::string to_string(Profile p);
Profile profile_from_string(const std::string& s);

struct WorldConfig {
  Profile profile = Profile::kCar;
  std::size_t T = 100;  // frame-pairs per sequence
  std::size_t vis_dim = 32;
  std::size_t imu_substeps = 10;
  std::size_t imu_dim = 6;  // 3 gyro + 3 accel
  std::size_t nuisance_dim = 4;
  double obs_noise_std = 0.05;
  double imu_noise_std = 0.05;
  double nuisance_std = 1.0;
  double nuisance_shift = 0.0;  // mean offset of the nuisance code
  double nuisance_gain = 1.0;   // scale of W2 relative to W1
  std::uint64_t family_seed = 0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool operator==(const WorldConfig&) const = default;
};

struct DatasetMeta {
  Profile profile = Profile::kCar;
  std::uint64_t seed = 0;
  std::uint64_t family_seed = 0;
  std::size_t index = 0;
  std::string degradation = "clean";

  bool operator==(const DatasetMeta&) const = default;
};

struct SequenceDataset {
  Trajectory trajectory;
  std::size_t vis_dim = 0;
  std::size_t imu_substeps = 0;
  std::size_t imu_dim = 0;
  std::vector<double> vis_obs;   // T x vis_dim
  std::vector<double> imu_obs;   // T x imu_substeps x imu_dim
  std::vector<double> nuisance;  // constant over the sequence
  DatasetMeta meta;

  std::size_t length() const { return trajectory.relatives.size(); }
  std::span<const double> vis_row(std::size_t t) const;
  /// All substeps of frame-pair t, substep-major.
  std::span<const double> imu_frame(std::size_t t) const;
  const Pose6& pose(std::size_t t) const { return trajectory.relatives[t]; }
};

/// Frozen sensor model of a world family.
struct SensorModel {
  std::size_t embed_hidden = 32;
  std::size_t embed_dim = 16;
  std::array<double, 6> pose_center{};
  std::array<double, 6> pose_scale{};
  std::vector<double> a1, b1;  // embed_hidden x 6
  std::vector<double> a2, b2;  // embed_dim x embed_hidden
  std::vector<double> w1;      // vis_dim x embed_dim
  std::vector<double> w2;      // vis_dim x nuisance_dim

  /// phi(normalize(pose)).
  std::vector<double> embed(const Pose6& pose) const;
};

SensorModel make_sensor_model(const WorldConfig& config);

/// Relative motions for sequence `index`.
Trajectory generate_trajectory(const WorldConfig& config, std::size_t index = 0);

/// Observations for a trajectory. `nuisance` overrides the sequence's own
/// draw (used to re-pair codes and trajectories).
SequenceDataset synthesize_observations(const Trajectory& trajectory, const WorldConfig& config,
                                        std::size_t index = 0,
                                        std::optional<std::vector<double>> nuisance = {});

std::vector<double> draw_nuisance(const WorldConfig& config, std::size_t index);

/// Sequences [first, first + count) of a world.
std::vector<SequenceDataset> generate_sequences(const WorldConfig& config, std::size_t count,
                                                std::size_t first = 0);

enum class DegradeKind { kNoisy, kMissing };
enum class DegradeTarget { kVis, kImu, kBoth };

DegradeKind degrade_kind_from_string(const std::string& s);
DegradeTarget degrade_target_from_string(const std::string& s);
std::string to_string(DegradeKind k);
std::string to_string(DegradeTarget t);

inline constexpr double kDegradeStd = 0.1;

/// noisy: adds N(0, 0.1^2) to targeted entries. missing: replaces them with
/// fresh N(0, 0.1^2) draws. Trajectory and nuisance are untouched.
SequenceDataset degrade(const SequenceDataset& dataset, DegradeKind kind, DegradeTarget target,
                        std::uint64_t seed);
SequenceDataset degrade(const SequenceDataset& dataset, const std::string& kind,
                        const std::string& target, std::uint64_t seed);

}  // namespace ibvo
