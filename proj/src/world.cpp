// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ibvo/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ibvo/rng.hpp"

namespace ibvo {

namespace {

constexpr double kFrameInterval = 0.1;  // seconds between frames

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument("world." + field + ": " + what);
}

// AR(1) process x' = mean + rho (x - mean) + sigma e, started from its
// stationary distribution.
struct Ar1 {
  double mean, rho, sigma, x;
  Ar1(double mean_, double rho_, double sigma_, Rng& rng)
      : mean(mean_), rho(rho_), sigma(sigma_),
        x(mean_ + rng.normal() * sigma_ / std::sqrt(1.0 - rho_ * rho_)) {}
  double step(Rng& rng) {
    x = mean + rho * (x - mean) + sigma * rng.normal();
    return x;
  }
};

std::array<double, 6> profile_center(Profile p) {
  if (p == Profile::kMav) return {0, 0, 0, 0, 0, 0};
  return {1.0, 0, 0, 0, 0, 0};
}

std::array<double, 6> profile_scale(Profile p) {
  if (p == Profile::kMav) return {0.03, 0.03, 0.03, 0.023, 0.023, 0.023};
  return {0.16, 0.01, 0.005, 0.005, 0.005, 0.023};
}

}  // namespace

std::string to_string(Profile p) {
  switch (p) {
    case Profile::kCar: return "car";
    case Profile::kMav: return "mav";
    case Profile::kStatic: return "static";
  }
  return "?";
}

Profile profile_from_string(const std::string& s) {
  if (s == "car") return Profile::kCar;
  if (s == "mav") return Profile::kMav;
  if (s == "static") return Profile::kStatic;
  throw std::invalid_argument("unknown profile '" + s + "' (expected car, mav or static)");
}

void WorldConfig::validate() const {
  require(T >= 2, "T", "must be >= 2");
  require(vis_dim >= 1, "vis_dim", "must be >= 1");
  require(imu_substeps >= 1, "imu_substeps", "must be >= 1");
  require(imu_dim == 6, "imu_dim", "must be 6 (3 gyro + 3 accel)");
  require(nuisance_dim >= 1, "nuisance_dim", "must be >= 1");
  require(obs_noise_std >= 0, "obs_noise_std", "must be >= 0");
  require(imu_noise_std >= 0, "imu_noise_std", "must be >= 0");
  require(nuisance_std >= 0, "nuisance_std", "must be >= 0");
  require(std::isfinite(nuisance_shift), "nuisance_shift", "must be finite");
  require(nuisance_gain >= 0, "nuisance_gain", "must be >= 0");
}

std::span<const double> SequenceDataset::vis_row(std::size_t t) const {
  return std::span<const double>(vis_obs).subspan(t * vis_dim, vis_dim);
}

std::span<const double> SequenceDataset::imu_frame(std::size_t t) const {
  const std::size_t n = imu_substeps * imu_dim;
  return std::span<const double>(imu_obs).subspan(t * n, n);
}

std::vector<double> SensorModel::embed(const Pose6& pose) const {
  const auto v = pose.vec();
  std::array<double, 6> x{};
  for (int i = 0; i < 6; ++i) x[i] = (v[i] - pose_center[i]) / pose_scale[i];
  std::vector<double> h(embed_hidden);
  for (std::size_t j = 0; j < embed_hidden; ++j) {
    double s = b1[j];
    for (int i = 0; i < 6; ++i) s += a1[j * 6 + i] * x[i];
    h[j] = std::tanh(s);
  }
  std::vector<double> out(embed_dim);
  for (std::size_t j = 0; j < embed_dim; ++j) {
    double s = b2[j];
    for (std::size_t i = 0; i < embed_hidden; ++i) s += a2[j * embed_hidden + i] * h[i];
    out[j] = std::tanh(s);
  }
  return out;
}

SensorModel make_sensor_model(const WorldConfig& config) {
  config.validate();
  SensorModel m;
  m.pose_center = profile_center(config.profile);
  m.pose_scale = profile_scale(config.profile);
  Rng rng(Rng::derive(config.family_seed,
                      {purpose(StreamPurpose::kSensorModel),
                       static_cast<std::uint64_t>(config.profile)}));
  const double g1 = 1.5 / std::sqrt(6.0);
  const double g2 = 1.5 / std::sqrt(static_cast<double>(m.embed_hidden));
  m.a1 = rng.normals(m.embed_hidden * 6, g1);
  m.b1 = rng.normals(m.embed_hidden, 0.1);
  m.a2 = rng.normals(m.embed_dim * m.embed_hidden, g2);
  m.b2 = rng.normals(m.embed_dim, 0.1);
  m.w1 = rng.normals(config.vis_dim * m.embed_dim, 1.0 / std::sqrt(double(m.embed_dim)));
  m.w2 = rng.normals(config.vis_dim * config.nuisance_dim,
                     config.nuisance_gain / std::sqrt(double(config.nuisance_dim)));
  return m;
}

Trajectory generate_trajectory(const WorldConfig& config, std::size_t index) {
  config.validate();
  std::vector<Pose6> rel(config.T);
  if (config.profile == Profile::kStatic) return integrate(rel);

  Rng rng(Rng::derive(config.seed, {purpose(StreamPurpose::kTrajectory), index}));
  if (config.profile == Profile::kCar) {
    Ar1 speed(1.0, 0.95, 0.05, rng);
    Ar1 yaw(0.0, 0.9, 0.01, rng);
    for (auto& p : rel) {
      const double v = std::clamp(speed.step(rng), 0.1, 2.0);
      const double w = std::clamp(yaw.step(rng), -0.2, 0.2);
      p.t = {v, 0.01 * rng.normal(), 0.005 * rng.normal()};
      p.r = {0.005 * rng.normal(), 0.005 * rng.normal(), w};
    }
  } else {
    std::array<Ar1, 3> rates{Ar1(0, 0.9, 0.01, rng), Ar1(0, 0.9, 0.01, rng),
                             Ar1(0, 0.9, 0.01, rng)};
    std::array<Ar1, 3> vel{Ar1(0, 0.95, 0.01, rng), Ar1(0, 0.95, 0.01, rng),
                           Ar1(0, 0.95, 0.01, rng)};
    for (auto& p : rel) {
      for (int k = 0; k < 3; ++k) {
        p.r[k] = std::clamp(rates[k].step(rng), -0.3, 0.3);
        p.t[k] = vel[k].step(rng);
      }
    }
  }
  return integrate(rel);
}

std::vector<double> draw_nuisance(const WorldConfig& config, std::size_t index) {
  Rng rng(Rng::derive(config.seed, {purpose(StreamPurpose::kNuisance), index}));
  std::vector<double> n(config.nuisance_dim);
  for (auto& x : n) x = config.nuisance_shift + config.nuisance_std * rng.normal();
  return n;
}

SequenceDataset synthesize_observations(const Trajectory& trajectory, const WorldConfig& config,
                                        std::size_t index,
                                        std::optional<std::vector<double>> nuisance) {
  config.validate();
  const SensorModel model = make_sensor_model(config);
  SequenceDataset ds;
  ds.trajectory = trajectory;
  ds.vis_dim = config.vis_dim;
  ds.imu_substeps = config.imu_substeps;
  ds.imu_dim = config.imu_dim;
  ds.nuisance = nuisance ? std::move(*nuisance) : draw_nuisance(config, index);
  if (ds.nuisance.size() != config.nuisance_dim) {
    throw std::invalid_argument("synthesize_observations: nuisance length mismatch");
  }
  ds.meta = {config.profile, config.seed, config.family_seed, index, "clean"};

  const std::size_t T = trajectory.relatives.size();
  const std::size_t V = config.vis_dim, N = config.nuisance_dim, E = model.embed_dim;
  std::vector<double> offset(V, 0.0);
  for (std::size_t v = 0; v < V; ++v) {
    for (std::size_t j = 0; j < N; ++j) offset[v] += model.w2[v * N + j] * ds.nuisance[j];
  }

  Rng vis_noise(Rng::derive(config.seed, {purpose(StreamPurpose::kVisNoise), index}));
  ds.vis_obs.resize(T * V);
  for (std::size_t t = 0; t < T; ++t) {
    const auto phi = model.embed(trajectory.relatives[t]);
    for (std::size_t v = 0; v < V; ++v) {
      double s = offset[v];
      for (std::size_t e = 0; e < E; ++e) s += model.w1[v * E + e] * phi[e];
      ds.vis_obs[t * V + v] = s + config.obs_noise_std * vis_noise.normal();
    }
  }

  // Gyro: rotation rate interpolated linearly from the previous frame-pair's
  // rate to the current one across the substeps. Accel: second difference of
  // translation between consecutive frame-pairs.
  Rng imu_noise(Rng::derive(config.seed, {purpose(StreamPurpose::kImuNoise), index}));
  const std::size_t K = config.imu_substeps;
  ds.imu_obs.resize(T * K * 6);
  for (std::size_t t = 0; t < T; ++t) {
    const Pose6& cur = trajectory.relatives[t];
    const Pose6& prev = trajectory.relatives[t == 0 ? 0 : t - 1];
    for (std::size_t k = 0; k < K; ++k) {
      const double u = static_cast<double>(k + 1) / static_cast<double>(K);
      double* row = &ds.imu_obs[(t * K + k) * 6];
      for (int a = 0; a < 3; ++a) {
        const double rate = ((1.0 - u) * prev.r[a] + u * cur.r[a]) / kFrameInterval;
        const double accel = (cur.t[a] - prev.t[a]) / (kFrameInterval * kFrameInterval);
        row[a] = rate + config.imu_noise_std * imu_noise.normal();
        row[3 + a] = accel + config.imu_noise_std * imu_noise.normal();
      }
    }
  }
  return ds;
}

std::vector<SequenceDataset> generate_sequences(const WorldConfig& config, std::size_t count,
                                                std::size_t first) {
  std::vector<SequenceDataset> out;
  out.reserve(count);
  for (std::size_t i = first; i < first + count; ++i) {
    out.push_back(synthesize_observations(generate_trajectory(config, i), config, i));
  }
  return out;
}

DegradeKind degrade_kind_from_string(const std::string& s) {
  if (s == "noisy") return DegradeKind::kNoisy;
  if (s == "missing") return DegradeKind::kMissing;
  throw std::invalid_argument("unknown degradation kind '" + s + "' (expected noisy or missing)");
}

DegradeTarget degrade_target_from_string(const std::string& s) {
  if (s == "vis") return DegradeTarget::kVis;
  if (s == "imu") return DegradeTarget::kImu;
  if (s == "both") return DegradeTarget::kBoth;
  throw std::invalid_argument("unknown degradation target '" + s +
                              "' (expected vis, imu or both)");
}

std::string to_string(DegradeKind k) { return k == DegradeKind::kNoisy ? "noisy" : "missing"; }

std::string to_string(DegradeTarget t) {
  switch (t) {
    case DegradeTarget::kVis: return "vis";
    case DegradeTarget::kImu: return "imu";
    case DegradeTarget::kBoth: return "both";
  }
  return "?";
}

SequenceDataset degrade(const SequenceDataset& dataset, DegradeKind kind, DegradeTarget target,
                        std::uint64_t seed) {
  SequenceDataset out = dataset;
  auto apply = [&](std::vector<double>& values, std::uint64_t channel) {
    Rng rng(Rng::derive(seed, {purpose(StreamPurpose::kDegrade), dataset.meta.index, channel}));
    for (auto& x : values) {
      const double e = kDegradeStd * rng.normal();
      x = kind == DegradeKind::kNoisy ? x + e : e;
    }
  };
  if (target == DegradeTarget::kVis || target == DegradeTarget::kBoth) apply(out.vis_obs, 0);
  if (target == DegradeTarget::kImu || target == DegradeTarget::kBoth) apply(out.imu_obs, 1);
  const std::string tag = to_string(kind) + "-" + to_string(target);
  out.meta.degradation =
      dataset.meta.degradation == "clean" ? tag : dataset.meta.degradation + "+" + tag;
  return out;
}

SequenceDataset degrade(const SequenceDataset& dataset, const std::string& kind,
                        const std::string& target, std::uint64_t seed) {
  return degrade(dataset, degrade_kind_from_string(kind), degrade_target_from_string(target),
                 seed);
}

}  // namespace ibvo
