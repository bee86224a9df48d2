// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0
//
// Mini-batch training over sliding-window clips.
//
// Every epoch visits each admissible window (sequence, start) exactly once in
// a shuffled order. The shuffle stream is part of the training state; clip
// noise is keyed by (seed, epoch, batch), so a run resumed from a checkpoint
// replays the remaining epochs bit for bit.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ibvo/model.hpp"
#include "ibvo/rng.hpp"
#include "ibvo/world.hpp"

namespace ibvo {

struct Milestone {
  std::size_t epoch = 0;
  double lr = 0.0;
  bool operator==(const Milestone&) const = default;
};

enum class OptimizerKind { kAdam, kSgd };
std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

struct TrainConfig {
  std::size_t epochs = 60;
  std::size_t batch_size = 16;
  std::size_t clip_len = 5;  // L, frame-pairs per clip
  double lr_initial = 1e-4;
  /// Unset means [(epochs / 2, 1e-5), (5 * epochs / 6, 5e-6)].
  std::optional<std::vector<Milestone>> lr_milestones;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip_norm = 5.0;  // global norm; infinity disables clipping
  std::uint64_t seed = 0;
  /// Fills the `seconds` metrics column; off keeps logs reproducible.
  bool record_wall_clock = false;

  void validate() const;
  std::vector<Milestone> milestones() const;
  /// Learning rate in effect during `epoch` (0-based).
  double lr_at(std::size_t epoch) const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;
  double pose_term = 0.0;
  double kl_term = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
  bool operator==(const EpochMetrics&) const = default;
};

inline constexpr const char* kMetricsHeader = "epoch,loss,pose_term,kl_term,lr,seconds";
void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> log);
void write_metrics_csv(const std::filesystem::path& path, std::span<const EpochMetrics> log);

struct OptimizerState {
  std::vector<std::vector<double>> m, v;  // per parameter array
  std::uint64_t step = 0;
  bool operator==(const OptimizerState&) const = default;
};

/// Scales `grads` in place to a global L2 norm of at most `max_norm`.
/// Returns the norm before clipping.
double clip_global_norm(std::vector<std::vector<double>>& grads, double max_norm);

/// One optimizer update of `params` with learning rate `lr`.
void apply_update(std::vector<Tensor>& params, const std::vector<std::vector<double>>& grads,
                  OptimizerState& state, const TrainConfig& config, double lr);

struct TrainState {
  IBModelParams params;
  OptimizerState optimizer;
  Rng shuffle;
  std::size_t epoch = 0;  // next epoch to run
  std::vector<EpochMetrics> log;
  bool operator==(const TrainState&) const = default;
};

TrainState init_train_state(const ModelConfig& model, const TrainConfig& train);

class TrainingDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainHooks {
  /// Written after every completed epoch (and kept when training diverges).
  std::optional<std::filesystem::path> checkpoint;
  std::function<void(const EpochMetrics&)> on_epoch;
};

/// Sliding-window starts of every sequence: (sequence, start) pairs.
std::vector<std::pair<std::size_t, std::size_t>> clip_windows(
    std::span<const SequenceDataset> datasets, std::size_t L);

/// Runs epochs [state.epoch, until_epoch). Throws TrainingDivergedError on a
/// non-finite loss; `state` then still holds the last completed epoch.
void train_epochs(TrainState& state, std::span<const SequenceDataset> datasets,
                  const ModelConfig& model, const TrainConfig& train, std::size_t until_epoch,
                  const TrainHooks& hooks = {});

struct TrainResult {
  IBModelParams params;
  std::vector<EpochMetrics> log;
};

TrainResult train(std::span<const SequenceDataset> datasets, const ModelConfig& model,
                  const TrainConfig& train, const TrainHooks& hooks = {});

}  // namespace ibvo
