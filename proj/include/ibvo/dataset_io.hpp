// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0
//
// On-disk dataset directories.
//
//   DIR/manifest.json   schema version, world config, sequence list; each
//                       entry carries the array index of its record file
//   DIR/seq_NNNNN.bin   little-endian f64 payload:
//                         frames   [T, 1 + 6 + vis_dim + substeps * imu_dim]
//                                  (index, relative pose, vis row, imu block)
//                         nuisance [nuisance_dim]

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ibvo/world.hpp"

namespace ibvo {

inline constexpr int kDatasetSchemaVersion = 1;

class DatasetFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaVersionError : public DatasetFormatError {
 public:
  using DatasetFormatError::DatasetFormatError;
};

/// Writes `sequences` into `dir` (created if needed). Existing record files
/// with the same names are overwritten.
void save_datasets(std::span<const SequenceDataset> sequences, const std::filesystem::path& dir,
                   const std::optional<WorldConfig>& world = {});
void save_dataset(const SequenceDataset& dataset, const std::filesystem::path& dir);

std::vector<SequenceDataset> load_datasets(const std::filesystem::path& dir);
/// Loads a directory holding exactly one sequence.
SequenceDataset load_dataset(const std::filesystem::path& dir);

/// World config recorded in the manifest, if any.
std::optional<WorldConfig> load_world_config(const std::filesystem::path& dir);

}  // namespace ibvo
