// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoints: `F` is a JSON index (configs, epoch, RNG state, metrics log,
// and {name, shape, offset} of every array) and `F.bin` holds the arrays as
// little-endian f64. Arrays are the model parameters followed by the Adam
// first and second moments.

#pragma once

#include <filesystem>
#include <stdexcept>

#include "ibvo/model.hpp"
#include "ibvo/trainer.hpp"

namespace ibvo {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  ModelConfig model;
  TrainConfig train;
  TrainState state;
};

/// Writes both files through temporaries, then renames them into place.
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& model,
                     const TrainConfig& train, const TrainState& state);

Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Loads and requires the stored ModelConfig to equal `expected`.
Checkpoint resume(const std::filesystem::path& path, const ModelConfig& expected);

std::filesystem::path blob_path(const std::filesystem::path& path);

}  // namespace ibvo
