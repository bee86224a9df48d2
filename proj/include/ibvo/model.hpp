// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic-stochastic state-space odometry model.
//
// Two recurrent paths run side by side. The observation path consumes sensor
// features; the pose path consumes the (tiled) relative pose. Each keeps a
// deterministic GRU state h and emits a diagonal Gaussian over a latent s.
// The pose regressor reads only the observation-path sample s_o, and the
// training objective penalizes KL(o-path || p-path) with weight gamma.
//
//   h_o[t] = GRU(h_o[t-1], relu(W [feat[t], s_o[t-1], s_p[t-1]]))
//   h_p[t] = GRU(h_p[t-1], relu(W [tile(xi[t]), s_o[t-1], s_p[t-1]]))
//   mu = W h,  std = min_std + softplus(W h),  s = mu + std * noise
//
// The GRU follows the common update/reset-gate form with separate input and
// hidden biases:
//
//   r = sig(x Wi_r + bi_r + h Wh_r + bh_r)
//   z = sig(x Wi_z + bi_z + h Wh_z + bh_z)
//   n = tanh(x Wi_n + bi_n + r * (h Wh_n + bh_n))
//   h' = (1 - z) * n + z * h
//
// Tensors are batched row-wise: every per-step quantity is [B, width].

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ibvo/autograd.hpp"
#include "ibvo/rng.hpp"
#include "ibvo/se3.hpp"
#include "ibvo/world.hpp"

namespace ibvo {

enum class Variant { kFull, kStochasticOnlyS, kStochasticOnlyD, kDeterministicBaseline };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct ModelConfig {
  std::size_t latent_dim = 32;         // d
  std::size_t deterministic_dim = 64;  // k
  std::size_t hidden_dim = 64;
  std::size_t imu_feat_dim = 32;
  bool use_vis = true;
  bool use_imu = true;
  Variant variant = Variant::kFull;
  double gamma = 0.1;
  double alpha = 1.0;
  double beta = 100.0;
  double min_std = 0.1;
  std::size_t pose_tile = 8;
  // Input shapes, taken from the data.
  std::size_t vis_dim = 32;
  std::size_t imu_substeps = 10;
  std::size_t imu_dim = 6;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;

  bool stochastic() const { return variant != Variant::kDeterministicBaseline; }
  bool has_deterministic_state() const {
    return variant == Variant::kFull || variant == Variant::kDeterministicBaseline;
  }
  std::size_t feature_dim() const;
};

/// Sets the input-shape fields of `config` from a dataset.
ModelConfig with_data_shape(ModelConfig config, const SequenceDataset& ds);

/// Named parameter arrays in a fixed order.
struct IBModelParams {
  std::vector<std::string> names;
  std::vector<Tensor> tensors;

  std::size_t index(const std::string& name) const;
  const Tensor& get(const std::string& name) const { return tensors[index(name)]; }
  std::size_t count() const;  // total scalar count
  bool operator==(const IBModelParams&) const = default;
};

/// Glorot-uniform weights, zero biases; deterministic in `seed`.
IBModelParams init_params(const ModelConfig& config, std::uint64_t seed);
/// Same layout with every entry zero.
IBModelParams zero_params(const ModelConfig& config);

struct LinearVars {
  Var w, b;  // [in, out], [out]
};
struct GruVars {
  Var wi, wh, bi, bh;  // [in, 3k], [k, 3k], [3k], [3k]
};

/// Parameters bound into a Graph. Members of absent blocks stay invalid.
struct ModelVars {
  const ModelConfig* config = nullptr;
  LinearVars vis1, vis2;
  GruVars imu;
  LinearVars fo_in, fp_in;
  GruVars fo_cell, fp_cell;
  LinearVars head_o_mu, head_o_std, head_p_mu, head_p_std;
  LinearVars reg1, reg2, reg_t, reg_r;
};

/// Binds `params` as trainable leaves (or constants) of `g`.
ModelVars bind_params(Graph& g, const ModelConfig& config, const IBModelParams& params, bool trainable);
/// Binds leaves that already exist, in IBModelParams order.
ModelVars bind_params(const ModelConfig& config, const IBModelParams& layout, std::span<const Var> vars);

Var linear(const LinearVars& l, const Var& x);
Var gru_cell(const GruVars& c, const Var& h_prev, const Var& x);

/// Observations of one frame-pair for a batch.
struct StepObs {
  std::optional<Tensor> vis;  // [B, vis_dim]
  std::vector<Tensor> imu;    // imu_substeps x [B, imu_dim]
};

/// Sensor feature [B, feature_dim]: vis MLP (linear output) and/or the final
/// state of a GRU folded over IMU substeps, concatenated.
Var encode(Graph& g, const ModelVars& m, const StepObs& obs);

/// Pose [B, 6] repeated pose_tile times along columns.
Var tile_pose(const Var& xi, std::size_t times);

Var obs_transition(const ModelVars& m, const Var& h_o_prev, const Var& feat, const Var& s_o_prev,
                   const Var& s_p_prev);
Var pose_transition(const ModelVars& m, const Var& h_p_prev, const Var& xi, const Var& s_o_prev,
                    const Var& s_p_prev);

struct GaussVars {
  Var mu, std;
};
enum class Path { kObs, kPose };
GaussVars stochastic_head(const ModelVars& m, const Var& h, Path which);

/// [B, 6] = [t, r] from a latent (s_o, or h_o for the deterministic baseline).
Var regress_pose(const ModelVars& m, const Var& s);

/// One batch of clips: L frame-pairs of B sequences.
struct ClipBatch {
  std::size_t B = 0;
  std::size_t L = 0;
  std::vector<StepObs> obs;        // L
  std::vector<Tensor> poses;       // L x [B, 6] ground truth
  std::vector<Tensor> noise_o;     // L x [B, d]
  std::vector<Tensor> noise_p;     // L x [B, d]

  /// Checks L >= 1 and every shape against `config`.
  void validate(const ModelConfig& config) const;
};

/// Window [start, start + L) of each (dataset, start) pair. Noise is drawn
/// step by step from `noise`, o-path before p-path; a null `noise` gives
/// all-zero draws.
ClipBatch make_clip_batch(std::span<const SequenceDataset* const> datasets,
                          std::span<const std::size_t> starts, std::size_t L,
                          const ModelConfig& config, Rng* noise);

enum class Mode { kTrain, kInfer };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

/// What fed the pose path at a step.
enum class PoseSource { kNone, kGroundTruth, kPrediction, kZero };

struct StepVars {
  Var h_o, h_p;
  GaussVars o, p;
  Var s_o, s_p;
  Var pred;  // [B, 6]
  Var kl;    // scalar, batch mean; invalid for the deterministic baseline
  PoseSource pose_source = PoseSource::kNone;
};

std::vector<StepVars> rollout(Graph& g, const ModelVars& m, const ClipBatch& clip, Mode mode);

/// Value-level view of one rollout step.
struct LatentBelief {
  Tensor h_o, h_p, mu_o, std_o, mu_p, std_p, s_o, s_p;
};
struct StepResult {
  LatentBelief belief;
  Tensor pred;  // [B, 6]
  double kl = 0.0;
  PoseSource pose_source = PoseSource::kNone;
};

std::vector<StepResult> rollout(const ClipBatch& clip, const ModelConfig& config,
                                const IBModelParams& params, Mode mode);

struct LossVars {
  Var total, pose_term, kl_term;  // kl_term is unweighted
};

/// Batch mean of sum_t [alpha |dt| + beta |dr|] plus gamma * sum_t kl_t.
/// Throws NumericError naming the step whose value is not finite.
LossVars clip_loss(Graph& g, const ModelVars& m, const ClipBatch& clip);

double clip_loss(const ClipBatch& clip, const ModelConfig& config, const IBModelParams& params);

/// Row b of a [B, 6] tensor as a pose.
Pose6 pose_row(const Tensor& poses, std::size_t b);

}  // namespace ibvo
