// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON run configuration. Every section is optional and falls back to the
// defaults of its struct; unknown keys are rejected with their full path.
//
//   {
//     "world":    {"profile": "car", "T": 100, "vis_dim": 32, ...},
//     "data":     {"train_sequences": 20, "test_sequences": 10,
//                  "test_nuisance_shift": 2.0},
//     "model":    {"latent_dim": 32, "sensors": ["vis", "imu"],
//                  "variant": "full", "gamma": 0.1, ...},
//     "train":    {"epochs": 60, "lr_initial": 1e-4,
//                  "lr_milestones": [{"epoch": 30, "lr": 1e-5}], ...},
//     "eval":     {"clip_len": 5},
//     "probe":    {"hidden": [32, 64, 128], "epochs": 60, ...},
//     "ablation": {"seeds": [0, 1, 2, 3, 4], "gammas": [...], ...},
//     "output_dir": "runs/demo"
//   }

#pragma once

#include <filesystem>
#include <string>

#include "ibvo/evaluator.hpp"
#include "ibvo/json_util.hpp"
#include "ibvo/model.hpp"
#include "ibvo/trainer.hpp"
#include "ibvo/world.hpp"

namespace ibvo {

struct RunConfig {
  WorldConfig world;
  DataOptions data;
  ModelConfig model;
  TrainConfig train;
  std::size_t eval_clip_len = 0;  // 0: use train.clip_len
  ProbeConfig probe;
  AblationOptions ablation;
  std::string output_dir;

  /// Validates every section; throws ConfigError naming the field.
  void validate() const;
  Experiment experiment() const;
};

Json to_json(const WorldConfig& c);
Json to_json(const ModelConfig& c);
Json to_json(const TrainConfig& c);
Json to_json(const RunConfig& c);

WorldConfig world_config_from_json(const Json& j, const std::string& where,
                                   WorldConfig base = {});
ModelConfig model_config_from_json(const Json& j, const std::string& where,
                                   ModelConfig base = {});
TrainConfig train_config_from_json(const Json& j, const std::string& where,
                                   TrainConfig base = {});
RunConfig run_config_from_json(const Json& j);

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace ibvo
