// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ibvo/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace ibvo {

namespace {

std::string sub(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

// Rethrows validation errors of a section as ConfigError.
template <typename F>
void as_config_error(F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

template <typename T, typename Read>
std::vector<T> read_list(const Json& obj, const std::string& where, const char* key,
                         std::vector<T> fallback, Read read) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  const std::string path = sub(where, key);
  if (!it->is_array()) throw ConfigError(path + ": expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    out.push_back(read((*it)[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

double number_at(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

std::size_t count_at(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned()) throw ConfigError(path + ": expected a non-negative integer");
  return j.get<std::size_t>();
}

}  // namespace

Json to_json(const WorldConfig& c) {
  return Json{{"profile", to_string(c.profile)},
              {"T", c.T},
              {"vis_dim", c.vis_dim},
              {"imu_substeps", c.imu_substeps},
              {"imu_dim", c.imu_dim},
              {"nuisance_dim", c.nuisance_dim},
              {"obs_noise_std", c.obs_noise_std},
              {"imu_noise_std", c.imu_noise_std},
              {"nuisance_std", c.nuisance_std},
              {"nuisance_shift", c.nuisance_shift},
              {"nuisance_gain", c.nuisance_gain},
              {"family_seed", c.family_seed},
              {"seed", c.seed}};
}

WorldConfig world_config_from_json(const Json& j, const std::string& where, WorldConfig c) {
  reject_unknown_keys(j, where,
                      {"profile", "T", "vis_dim", "imu_substeps", "imu_dim", "nuisance_dim",
                       "obs_noise_std", "imu_noise_std", "nuisance_std", "nuisance_shift",
                       "nuisance_gain", "family_seed", "seed"});
  std::string profile = to_string(c.profile);
  read_field(j, where, "profile", profile);
  as_config_error([&] { c.profile = profile_from_string(profile); });
  read_field(j, where, "T", c.T);
  read_field(j, where, "vis_dim", c.vis_dim);
  read_field(j, where, "imu_substeps", c.imu_substeps);
  read_field(j, where, "imu_dim", c.imu_dim);
  read_field(j, where, "nuisance_dim", c.nuisance_dim);
  read_field(j, where, "obs_noise_std", c.obs_noise_std);
  read_field(j, where, "imu_noise_std", c.imu_noise_std);
  read_field(j, where, "nuisance_std", c.nuisance_std);
  read_field(j, where, "nuisance_shift", c.nuisance_shift);
  read_field(j, where, "nuisance_gain", c.nuisance_gain);
  read_field(j, where, "family_seed", c.family_seed);
  read_field(j, where, "seed", c.seed);
  as_config_error([&] { c.validate(); });
  return c;
}

Json to_json(const ModelConfig& c) {
  Json sensors = Json::array();
  if (c.use_vis) sensors.push_back("vis");
  if (c.use_imu) sensors.push_back("imu");
  return Json{{"latent_dim", c.latent_dim},
              {"deterministic_dim", c.deterministic_dim},
              {"hidden_dim", c.hidden_dim},
              {"imu_feat_dim", c.imu_feat_dim},
              {"sensors", sensors},
              {"variant", to_string(c.variant)},
              {"gamma", c.gamma},
              {"alpha", c.alpha},
              {"beta", c.beta},
              {"min_std", c.min_std},
              {"pose_tile", c.pose_tile},
              {"vis_dim", c.vis_dim},
              {"imu_substeps", c.imu_substeps},
              {"imu_dim", c.imu_dim}};
}

ModelConfig model_config_from_json(const Json& j, const std::string& where, ModelConfig c) {
  reject_unknown_keys(j, where,
                      {"latent_dim", "deterministic_dim", "hidden_dim", "imu_feat_dim",
                       "sensors", "variant", "gamma", "alpha", "beta", "min_std", "pose_tile",
                       "vis_dim", "imu_substeps", "imu_dim"});
  read_field(j, where, "latent_dim", c.latent_dim);
  read_field(j, where, "deterministic_dim", c.deterministic_dim);
  read_field(j, where, "hidden_dim", c.hidden_dim);
  read_field(j, where, "imu_feat_dim", c.imu_feat_dim);
  if (j.contains("sensors")) {
    const auto sensors = read_list<std::string>(
        j, where, "sensors", {}, [](const Json& e, const std::string& path) {
          if (!e.is_string() || (e != "vis" && e != "imu")) {
            throw ConfigError(path + ": expected \"vis\" or \"imu\"");
          }
          return e.get<std::string>();
        });
    c.use_vis = std::find(sensors.begin(), sensors.end(), "vis") != sensors.end();
    c.use_imu = std::find(sensors.begin(), sensors.end(), "imu") != sensors.end();
  }
  std::string variant = to_string(c.variant);
  read_field(j, where, "variant", variant);
  as_config_error([&] { c.variant = variant_from_string(variant); });
  read_field(j, where, "gamma", c.gamma);
  read_field(j, where, "alpha", c.alpha);
  read_field(j, where, "beta", c.beta);
  read_field(j, where, "min_std", c.min_std);
  read_field(j, where, "pose_tile", c.pose_tile);
  read_field(j, where, "vis_dim", c.vis_dim);
  read_field(j, where, "imu_substeps", c.imu_substeps);
  read_field(j, where, "imu_dim", c.imu_dim);
  as_config_error([&] { c.validate(); });
  return c;
}

Json to_json(const TrainConfig& c) {
  Json ms = Json::array();
  for (const auto& m : c.milestones()) ms.push_back(Json{{"epoch", m.epoch}, {"lr", m.lr}});
  return Json{{"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"clip_len", c.clip_len},
              {"lr_initial", c.lr_initial},
              {"lr_milestones", ms},
              {"optimizer", to_string(c.optimizer)},
              {"adam_beta1", c.adam_beta1},
              {"adam_beta2", c.adam_beta2},
              {"adam_eps", c.adam_eps},
              {"grad_clip_norm", std::isfinite(c.grad_clip_norm) ? Json(c.grad_clip_norm)
                                                                  : Json("inf")},
              {"seed", c.seed},
              {"record_wall_clock", c.record_wall_clock}};
}

TrainConfig train_config_from_json(const Json& j, const std::string& where, TrainConfig c) {
  reject_unknown_keys(j, where,
                      {"epochs", "batch_size", "clip_len", "lr_initial", "lr_milestones",
                       "optimizer", "adam_beta1", "adam_beta2", "adam_eps", "grad_clip_norm",
                       "seed", "record_wall_clock"});
  read_field(j, where, "epochs", c.epochs);
  read_field(j, where, "batch_size", c.batch_size);
  read_field(j, where, "clip_len", c.clip_len);
  read_field(j, where, "lr_initial", c.lr_initial);
  if (j.contains("lr_milestones")) {
    c.lr_milestones = read_list<Milestone>(
        j, where, "lr_milestones", {}, [](const Json& e, const std::string& path) {
          reject_unknown_keys(e, path, {"epoch", "lr"});
          if (!e.contains("epoch") || !e.contains("lr")) {
            throw ConfigError(path + ": expected {\"epoch\": ..., \"lr\": ...}");
          }
          return Milestone{count_at(e["epoch"], path + ".epoch"), number_at(e["lr"], path + ".lr")};
        });
  }
  std::string opt = to_string(c.optimizer);
  read_field(j, where, "optimizer", opt);
  as_config_error([&] { c.optimizer = optimizer_from_string(opt); });
  read_field(j, where, "adam_beta1", c.adam_beta1);
  read_field(j, where, "adam_beta2", c.adam_beta2);
  read_field(j, where, "adam_eps", c.adam_eps);
  if (j.contains("grad_clip_norm") && j["grad_clip_norm"] == "inf") {
    c.grad_clip_norm = std::numeric_limits<double>::infinity();
  } else {
    read_field(j, where, "grad_clip_norm", c.grad_clip_norm);
  }
  read_field(j, where, "seed", c.seed);
  read_field(j, where, "record_wall_clock", c.record_wall_clock);
  as_config_error([&] { c.validate(); });
  return c;
}

void RunConfig::validate() const {
  as_config_error([&] {
    world.validate();
    model.validate();
    train.validate();
  });
  if (data.train_sequences < 1) throw ConfigError("data.train_sequences: must be >= 1");
  if (data.test_sequences < 1) throw ConfigError("data.test_sequences: must be >= 1");
  const std::size_t L = eval_clip_len ? eval_clip_len : train.clip_len;
  if (L > world.T) throw ConfigError("eval.clip_len: exceeds world.T");
  if (train.clip_len > world.T) throw ConfigError("train.clip_len: exceeds world.T");
  if (probe.hidden.empty()) throw ConfigError("probe.hidden: must not be empty");
  if (ablation.seeds.empty()) throw ConfigError("ablation.seeds: must not be empty");
}

Experiment RunConfig::experiment() const {
  Experiment e;
  e.world = world;
  e.data = data;
  e.model = model;
  e.model.vis_dim = world.vis_dim;
  e.model.imu_substeps = world.imu_substeps;
  e.model.imu_dim = world.imu_dim;
  e.train = train;
  e.eval_clip_len = eval_clip_len ? eval_clip_len : train.clip_len;
  return e;
}

Json to_json(const RunConfig& c) {
  return Json{
      {"world", to_json(c.world)},
      {"data",
       {{"train_sequences", c.data.train_sequences},
        {"test_sequences", c.data.test_sequences},
        {"test_nuisance_shift", c.data.test_nuisance_shift}}},
      {"model", to_json(c.model)},
      {"train", to_json(c.train)},
      {"eval", {{"clip_len", c.eval_clip_len}}},
      {"probe",
       {{"hidden", c.probe.hidden},
        {"epochs", c.probe.epochs},
        {"batch_size", c.probe.batch_size},
        {"lr", c.probe.lr},
        {"clip_len", c.probe.clip_len},
        {"seed", c.probe.seed}}},
      {"ablation",
       {{"seeds", c.ablation.seeds},
        {"gammas", c.ablation.gammas},
        {"sample_fractions", c.ablation.sample_fractions},
        {"latent_dims", c.ablation.latent_dims},
        {"latent_sample_sizes", c.ablation.latent_sample_sizes}}},
      {"output_dir", c.output_dir}};
}

RunConfig run_config_from_json(const Json& j) {
  reject_unknown_keys(j, "",
                      {"world", "data", "model", "train", "eval", "probe", "ablation",
                       "output_dir"});
  RunConfig c;
  if (j.contains("world")) c.world = world_config_from_json(j["world"], "world");
  if (j.contains("data")) {
    const Json& d = j["data"];
    reject_unknown_keys(d, "data", {"train_sequences", "test_sequences", "test_nuisance_shift"});
    read_field(d, "data", "train_sequences", c.data.train_sequences);
    read_field(d, "data", "test_sequences", c.data.test_sequences);
    read_field(d, "data", "test_nuisance_shift", c.data.test_nuisance_shift);
  }
  if (j.contains("model")) c.model = model_config_from_json(j["model"], "model");
  if (j.contains("train")) c.train = train_config_from_json(j["train"], "train");
  if (j.contains("eval")) {
    reject_unknown_keys(j["eval"], "eval", {"clip_len"});
    read_field(j["eval"], "eval", "clip_len", c.eval_clip_len);
  }
  if (j.contains("probe")) {
    const Json& p = j["probe"];
    reject_unknown_keys(p, "probe", {"hidden", "epochs", "batch_size", "lr", "clip_len", "seed"});
    c.probe.hidden = read_list<std::size_t>(p, "probe", "hidden", c.probe.hidden, count_at);
    read_field(p, "probe", "epochs", c.probe.epochs);
    read_field(p, "probe", "batch_size", c.probe.batch_size);
    read_field(p, "probe", "lr", c.probe.lr);
    read_field(p, "probe", "clip_len", c.probe.clip_len);
    read_field(p, "probe", "seed", c.probe.seed);
  }
  if (j.contains("ablation")) {
    const Json& a = j["ablation"];
    reject_unknown_keys(a, "ablation",
                        {"seeds", "gammas", "sample_fractions", "latent_dims",
                         "latent_sample_sizes"});
    c.ablation.seeds = read_list<std::uint64_t>(a, "ablation", "seeds", c.ablation.seeds, count_at);
    c.ablation.gammas = read_list<double>(a, "ablation", "gammas", c.ablation.gammas, number_at);
    c.ablation.sample_fractions = read_list<double>(a, "ablation", "sample_fractions",
                                                    c.ablation.sample_fractions, number_at);
    c.ablation.latent_dims =
        read_list<std::size_t>(a, "ablation", "latent_dims", c.ablation.latent_dims, count_at);
    c.ablation.latent_sample_sizes = read_list<std::size_t>(
        a, "ablation", "latent_sample_sizes", c.ablation.latent_sample_sizes, count_at);
  }
  read_field(j, "", "output_dir", c.output_dir);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace ibvo
