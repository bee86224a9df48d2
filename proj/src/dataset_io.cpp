// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ibvo/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ibvo/config.hpp"
#include "ibvo/json_util.hpp"

namespace ibvo {

static_assert(std::endian::native == std::endian::little, "payloads are written in host order");

namespace fs = std::filesystem;

namespace {

std::string record_name(std::size_t i) {
  std::ostringstream os;
  os << "seq_" << std::setw(5) << std::setfill('0') << i << ".bin";
  return os.str();
}

std::size_t frame_width(const SequenceDataset& ds) {
  return 1 + 6 + ds.vis_dim + ds.imu_substeps * ds.imu_dim;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetFormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void append_doubles(std::string& buf, std::span<const double> v) {
  const auto* p = reinterpret_cast<const char*>(v.data());
  buf.append(p, v.size() * sizeof(double));
}

Json meta_to_json(const DatasetMeta& m) {
  return Json{{"profile", to_string(m.profile)},
              {"seed", m.seed},
              {"family_seed", m.family_seed},
              {"index", m.index},
              {"degradation", m.degradation}};
}

}  // namespace

void save_datasets(std::span<const SequenceDataset> sequences, const fs::path& dir,
                   const std::optional<WorldConfig>& world) {
  fs::create_directories(dir);
  Json list = Json::array();
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const SequenceDataset& ds = sequences[i];
    const std::size_t T = ds.length();
    const std::size_t W = frame_width(ds);
    if (ds.vis_obs.size() != T * ds.vis_dim ||
        ds.imu_obs.size() != T * ds.imu_substeps * ds.imu_dim) {
      throw std::invalid_argument("save_datasets: sequence " + std::to_string(i) +
                                  " has inconsistent observation sizes");
    }
    std::string buf;
    buf.reserve((T * W + ds.nuisance.size()) * sizeof(double));
    std::vector<double> row(W);
    for (std::size_t t = 0; t < T; ++t) {
      row[0] = static_cast<double>(t);
      const auto p = ds.pose(t).vec();
      std::copy(p.begin(), p.end(), row.begin() + 1);
      const auto vis = ds.vis_row(t);
      std::copy(vis.begin(), vis.end(), row.begin() + 7);
      const auto imu = ds.imu_frame(t);
      std::copy(imu.begin(), imu.end(), row.begin() + 7 + ds.vis_dim);
      append_doubles(buf, row);
    }
    const std::size_t nuisance_offset = buf.size();
    append_doubles(buf, ds.nuisance);
    const std::string name = record_name(i);
    write_file(dir / name, buf);

    list.push_back(Json{
        {"file", name},
        {"bytes", buf.size()},
        {"vis_dim", ds.vis_dim},
        {"imu_substeps", ds.imu_substeps},
        {"imu_dim", ds.imu_dim},
        {"meta", meta_to_json(ds.meta)},
        {"arrays",
         Json::array({Json{{"name", "frames"}, {"shape", {T, W}}, {"offset", 0}},
                      Json{{"name", "nuisance"},
                           {"shape", {ds.nuisance.size()}},
                           {"offset", nuisance_offset}}})}});
  }
  Json manifest{{"schema_version", kDatasetSchemaVersion},
                {"sequences", list},
                {"world", world ? to_json(*world) : Json(nullptr)}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

void save_dataset(const SequenceDataset& dataset, const fs::path& dir) {
  save_datasets(std::span<const SequenceDataset>(&dataset, 1), dir);
}

namespace {

Json load_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  Json manifest;
  try {
    manifest = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw DatasetFormatError(path.string() + ": " + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("schema_version") ||
      !manifest["schema_version"].is_number_integer()) {
    throw DatasetFormatError(path.string() + ": missing schema_version");
  }
  const int version = manifest["schema_version"].get<int>();
  if (version != kDatasetSchemaVersion) {
    throw SchemaVersionError(path.string() + ": schema_version " + std::to_string(version) +
                             " is not supported (expected " +
                             std::to_string(kDatasetSchemaVersion) + ")");
  }
  if (!manifest.contains("sequences") || !manifest["sequences"].is_array()) {
    throw DatasetFormatError(path.string() + ": missing sequence list");
  }
  return manifest;
}

struct ArrayRef {
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t count() const {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
  }
};

ArrayRef find_array(const Json& entry, const std::string& record, const char* name) {
  for (const auto& a : entry.at("arrays")) {
    if (a.at("name").get<std::string>() == name) {
      return {a.at("shape").get<std::vector<std::size_t>>(), a.at("offset").get<std::size_t>()};
    }
  }
  throw DatasetFormatError(record + ": missing array '" + name + "'");
}

SequenceDataset load_record(const fs::path& dir, const Json& entry, std::size_t i) {
  std::string record = "sequence " + std::to_string(i);
  try {
    const std::string file = entry.at("file").get<std::string>();
    record += " (" + file + ")";
    SequenceDataset ds;
    ds.vis_dim = entry.at("vis_dim").get<std::size_t>();
    ds.imu_substeps = entry.at("imu_substeps").get<std::size_t>();
    ds.imu_dim = entry.at("imu_dim").get<std::size_t>();
    const Json& meta = entry.at("meta");
    ds.meta.profile = profile_from_string(meta.at("profile").get<std::string>());
    ds.meta.seed = meta.at("seed").get<std::uint64_t>();
    ds.meta.family_seed = meta.at("family_seed").get<std::uint64_t>();
    ds.meta.index = meta.at("index").get<std::size_t>();
    ds.meta.degradation = meta.at("degradation").get<std::string>();

    const std::string bytes = read_file(dir / file);
    if (bytes.size() != entry.at("bytes").get<std::size_t>() || bytes.size() % 8 != 0) {
      throw DatasetFormatError(record + ": expected " +
                               std::to_string(entry.at("bytes").get<std::size_t>()) +
                               " bytes, found " + std::to_string(bytes.size()));
    }
    auto read_array = [&](const char* name) {
      const ArrayRef ref = find_array(entry, record, name);
      if (ref.offset % 8 != 0 || ref.offset + ref.count() * 8 > bytes.size()) {
        throw DatasetFormatError(record + ": array '" + name + "' exceeds the file");
      }
      std::vector<double> v(ref.count());
      std::memcpy(v.data(), bytes.data() + ref.offset, v.size() * sizeof(double));
      return std::make_pair(ref, std::move(v));
    };
    auto [frames_ref, frames] = read_array("frames");
    const std::size_t W = frame_width(ds);
    if (frames_ref.shape.size() != 2 || frames_ref.shape[1] != W) {
      throw DatasetFormatError(record + ": frames width does not match vis/imu dims");
    }
    const std::size_t T = frames_ref.shape[0];
    std::vector<Pose6> rel(T);
    ds.vis_obs.resize(T * ds.vis_dim);
    ds.imu_obs.resize(T * ds.imu_substeps * ds.imu_dim);
    for (std::size_t t = 0; t < T; ++t) {
      const double* row = frames.data() + t * W;
      if (row[0] != static_cast<double>(t)) {
        throw DatasetFormatError(record + ": frame " + std::to_string(t) + " has index " +
                                 std::to_string(row[0]));
      }
      rel[t] = Pose6::from_vec(std::span<const double>(row + 1, 6));
      std::copy(row + 7, row + 7 + ds.vis_dim, ds.vis_obs.begin() + t * ds.vis_dim);
      const std::size_t n = ds.imu_substeps * ds.imu_dim;
      std::copy(row + 7 + ds.vis_dim, row + W, ds.imu_obs.begin() + t * n);
    }
    ds.trajectory = integrate(rel);
    ds.nuisance = read_array("nuisance").second;
    require_finite(frames, record.c_str());
    require_finite(ds.nuisance, record.c_str());
    return ds;
  } catch (const DatasetFormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw DatasetFormatError(record + ": " + e.what());
  }
}

}  // namespace

std::vector<SequenceDataset> load_datasets(const fs::path& dir) {
  const Json manifest = load_manifest(dir);
  std::vector<SequenceDataset> out;
  std::size_t i = 0;
  for (const auto& entry : manifest["sequences"]) out.push_back(load_record(dir, entry, i++));
  return out;
}

SequenceDataset load_dataset(const fs::path& dir) {
  auto all = load_datasets(dir);
  if (all.size() != 1) {
    throw DatasetFormatError(dir.string() + ": expected one sequence, found " +
                             std::to_string(all.size()));
  }
  return std::move(all.front());
}

std::optional<WorldConfig> load_world_config(const fs::path& dir) {
  const Json manifest = load_manifest(dir);
  if (!manifest.contains("world") || manifest["world"].is_null()) return std::nullopt;
  return world_config_from_json(manifest["world"], "world");
}

}  // namespace ibvo
