// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ibvo/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ibvo/config.hpp"

namespace ibvo {

static_assert(std::endian::native == std::endian::little, "blobs are written in host order");

namespace fs = std::filesystem;

namespace {

constexpr int kCheckpointVersion = 1;

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

fs::path blob_path(const fs::path& path) { return fs::path(path.string() + ".bin"); }

void save_checkpoint(const fs::path& path, const ModelConfig& model, const TrainConfig& train,
                     const TrainState& state) {
  std::string blob;
  Json arrays = Json::array();
  auto put = [&](const std::string& name, const Shape& shape, std::span<const double> data) {
    arrays.push_back(Json{{"name", name}, {"shape", shape}, {"offset", blob.size()}});
    blob.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(double));
  };
  for (std::size_t i = 0; i < state.params.names.size(); ++i) {
    put(state.params.names[i], state.params.tensors[i].shape(), state.params.tensors[i].data());
  }
  for (std::size_t i = 0; i < state.optimizer.m.size(); ++i) {
    const Shape shape = state.params.tensors[i].shape();
    put("adam.m." + state.params.names[i], shape, state.optimizer.m[i]);
    put("adam.v." + state.params.names[i], shape, state.optimizer.v[i]);
  }
  Json log = Json::array();
  for (const auto& m : state.log) {
    log.push_back(Json{{"epoch", m.epoch},
                       {"loss", m.loss},
                       {"pose_term", m.pose_term},
                       {"kl_term", m.kl_term},
                       {"lr", m.lr},
                       {"seconds", m.seconds}});
  }
  const Json index{{"format", "ibvo-checkpoint"},
                   {"version", kCheckpointVersion},
                   {"model", to_json(model)},
                   {"train", to_json(train)},
                   {"epoch", state.epoch},
                   {"rng", {{"key", state.shuffle.key()}, {"counter", state.shuffle.counter()}}},
                   {"optimizer",
                    {{"step", state.optimizer.step}, {"moments", !state.optimizer.m.empty()}}},
                   {"blob", blob_path(path).filename().string()},
                   {"blob_bytes", blob.size()},
                   {"arrays", arrays},
                   {"log", log}};

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp_index(path.string() + ".tmp");
  const fs::path tmp_blob(blob_path(path).string() + ".tmp");
  write_bytes(tmp_blob, blob);
  write_bytes(tmp_index, index.dump(2) + "\n");
  fs::rename(tmp_blob, blob_path(path));
  fs::rename(tmp_index, path);
}

Checkpoint load_checkpoint(const fs::path& path) {
  const std::string where = "checkpoint " + path.string();
  try {
    const Json j = Json::parse(read_bytes(path));
    if (j.value("format", "") != "ibvo-checkpoint") throw CheckpointError(where + ": not a checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw CheckpointError(where + ": unsupported version " + j.at("version").dump());
    }
    Checkpoint c;
    c.model = model_config_from_json(j.at("model"), "model");
    c.train = train_config_from_json(j.at("train"), "train");
    c.state.epoch = j.at("epoch").get<std::size_t>();
    c.state.shuffle =
        Rng(j.at("rng").at("key").get<std::uint64_t>(), j.at("rng").at("counter").get<std::uint64_t>());
    c.state.optimizer.step = j.at("optimizer").at("step").get<std::uint64_t>();
    const bool moments = j.at("optimizer").at("moments").get<bool>();

    const std::string blob = read_bytes(path.parent_path() / j.at("blob").get<std::string>());
    if (blob.size() != j.at("blob_bytes").get<std::size_t>()) {
      throw CheckpointError(where + ": blob holds " + std::to_string(blob.size()) +
                            " bytes, index expects " + j.at("blob_bytes").dump());
    }
    auto read_array = [&](const Json& a, std::size_t expect_count) {
      const std::size_t offset = a.at("offset").get<std::size_t>();
      if (offset % 8 != 0 || offset + expect_count * 8 > blob.size()) {
        throw CheckpointError(where + ": array '" + a.at("name").get<std::string>() +
                              "' lies outside the blob");
      }
      std::vector<double> v(expect_count);
      std::memcpy(v.data(), blob.data() + offset, expect_count * sizeof(double));
      return v;
    };

    const IBModelParams layout = zero_params(c.model);
    const Json& arrays = j.at("arrays");
    const std::size_t n = layout.names.size();
    if (arrays.size() != (moments ? 3 * n : n)) {
      throw CheckpointError(where + ": array count does not match the model config");
    }
    c.state.params = layout;
    for (std::size_t i = 0; i < n; ++i) {
      const Json& a = arrays[i];
      if (a.at("name").get<std::string>() != layout.names[i] ||
          a.at("shape").get<Shape>() != layout.tensors[i].shape()) {
        throw CheckpointError(where + ": array " + std::to_string(i) + " ('" +
                              a.at("name").get<std::string>() + "') does not match '" +
                              layout.names[i] + "' " + shape_str(layout.tensors[i].shape()));
      }
      c.state.params.tensors[i] =
          Tensor(layout.tensors[i].shape(), read_array(a, layout.tensors[i].size()));
    }
    if (moments) {
      for (std::size_t i = 0; i < n; ++i) {
        c.state.optimizer.m.push_back(read_array(arrays[n + 2 * i], layout.tensors[i].size()));
        c.state.optimizer.v.push_back(read_array(arrays[n + 2 * i + 1], layout.tensors[i].size()));
      }
    }
    for (const auto& m : j.at("log")) {
      c.state.log.push_back({m.at("epoch").get<std::size_t>(), m.at("loss").get<double>(),
                             m.at("pose_term").get<double>(), m.at("kl_term").get<double>(),
                             m.at("lr").get<double>(), m.at("seconds").get<double>()});
    }
    return c;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(where + ": " + e.what());
  }
}

Checkpoint resume(const fs::path& path, const ModelConfig& expected) {
  Checkpoint c = load_checkpoint(path);
  if (!(c.model == expected)) {
    throw CheckpointError("checkpoint " + path.string() +
                          ": model config differs from the requested one (stored " +
                          to_json(c.model).dump() + ")");
  }
  return c;
}

}  // namespace ibvo
