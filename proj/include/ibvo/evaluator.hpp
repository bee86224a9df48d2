// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0
//
// Sliding-window evaluation, uncertainty analysis, the nuisance probe, and
// ablation sweeps.
//
// A sequence of T frame-pairs is cut into T - L + 1 overlapping clips, one per
// start index. Position j of the clip starting at s predicts pair s + j, so an
// interior pair receives one prediction from every position. Evaluation runs
// the pose path on the model's own predictions and reads latent means (the
// sampling noise is zero).

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ibvo/model.hpp"
#include "ibvo/se3.hpp"
#include "ibvo/trainer.hpp"
#include "ibvo/world.hpp"

namespace ibvo {

struct SequenceReport {
  std::size_t index = 0;  // meta.index of the sequence
  double t_rmse = 0.0;
  double r_rmse = 0.0;
  double sigma2 = 0.0;
};

struct EvalReport {
  std::size_t L = 0;
  std::size_t pairs = 0;  // refined pairs over all sequences
  double t_rmse = 0.0;    // m, over refined pairs
  double r_rmse = 0.0;    // deg, over refined pairs
  std::vector<double> pos_t_rmse, pos_r_rmse;  // per clip position
  std::vector<double> pos_sigma2;              // mean std_o^2 per position
  double sigma2 = 0.0;                         // mean std_o^2 over everything
  double sigma2_p = 0.0;                       // pose-path diagnostic
  std::vector<std::size_t> pos_count;          // predictions per position
  std::vector<SequenceReport> sequences;
};

/// Throws std::invalid_argument if a sequence is shorter than L. The
/// deterministic baseline has no latent variance and reports sigma2 = 0.
EvalReport evaluate(const IBModelParams& params, const ModelConfig& config,
                    std::span<const SequenceDataset> datasets, std::size_t L);

/// Per-position predictions of one pair, indexed by clip position.
/// Drops position 0 and averages the rest: translations arithmetically,
/// rotations componentwise on wrapped Euler angles. A single prediction is
/// passed through and sets `*passthrough` when given.
Pose6 refine(std::span<const Pose6> by_position, bool* passthrough = nullptr);

/// Refinement when only some positions are available (sequence edges).
/// `positions` is sorted ascending.
Pose6 refine_available(std::span<const std::size_t> positions, std::span<const Pose6> preds);

/// Mean of angles, wrapped around the first one.
double wrapped_angle_mean(std::span<const double> angles);

struct UncertaintyBin {
  double lo = 0.0, hi = 0.0;
  std::size_t count = 0;
  double sigma2 = 0.0;
};

struct UncertaintyReport {
  double sigma2 = 0.0;
  std::vector<UncertaintyBin> by_turn;     // |rotation angle| of the pair, rad
  std::vector<UncertaintyBin> by_forward;  // forward translation, m
};

/// Mean std_o^2 over every step of the sliding-window rollout, plus
/// equal-width bins over the motion magnitude of the predicted pair.
UncertaintyReport uncertainty(const IBModelParams& params, const ModelConfig& config,
                              std::span<const SequenceDataset> datasets, std::size_t L,
                              std::size_t bins = 5);

void write_eval_csv(std::ostream& out, const EvalReport& report);

// ---------------------------------------------------------------------------
// Nuisance probe

struct ProbeConfig {
  std::vector<std::size_t> hidden = {32, 64, 128};
  std::size_t epochs = 60;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::size_t clip_len = 5;
  std::uint64_t seed = 0;
};

/// Latents s_o (sampled with seeded noise) at every step of non-overlapping
/// clips, one row per step, paired with the sequence's nuisance code.
struct ProbeData {
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> y;
};

ProbeData probe_latents(const IBModelParams& params, const ModelConfig& config,
                        std::span<const SequenceDataset> datasets, std::size_t L,
                        std::uint64_t seed);
/// Raw visual observation rows paired with the nuisance code.
ProbeData probe_observations(std::span<const SequenceDataset> datasets);
/// Standard-normal inputs of width `dim` paired with the nuisance code.
ProbeData probe_noise(const ProbeData& like, std::size_t dim, std::uint64_t seed);

/// Fits a 3-layer perceptron (hidden, hidden, out) by Adam on squared error
/// and returns the mean squared error on `test`.
double fit_probe(const ProbeData& train, const ProbeData& test, std::size_t hidden,
                 const ProbeConfig& config);

/// Held-out squared error of the training-mean predictor.
double constant_predictor_mse(const ProbeData& train, const ProbeData& test);

struct ProbeRow {
  std::size_t hidden = 0;
  double mse_baseline = 0.0;  // gamma = 0 latents
  double mse_ib = 0.0;        // gamma > 0 latents
  double mse_noise = 0.0;     // white-noise inputs
  double mse_constant = 0.0;  // best constant predictor
};

struct ProbedModel {
  const IBModelParams* params = nullptr;
  const ModelConfig* config = nullptr;
};

std::vector<ProbeRow> nuisance_probe(const ProbedModel& baseline, const ProbedModel& ib,
                                     std::span<const SequenceDataset> train,
                                     std::span<const SequenceDataset> test,
                                     const ProbeConfig& config);

void write_probe_csv(std::ostream& out, std::span<const ProbeRow> rows);

// ---------------------------------------------------------------------------
// Experiments and ablations

struct DataOptions {
  std::size_t train_sequences = 20;
  std::size_t test_sequences = 10;
  double test_nuisance_shift = 2.0;
  bool operator==(const DataOptions&) const = default;
};

/// First sequence index of test sets; keeps them disjoint from training.
inline constexpr std::size_t kTestIndexBase = 1'000'000;

struct Experiment {
  WorldConfig world;
  DataOptions data;
  ModelConfig model;
  TrainConfig train;
  std::size_t eval_clip_len = 5;
};

/// The world of repeat `seed`: sensor model and trajectories both keyed by it.
WorldConfig world_for_seed(const WorldConfig& base, std::uint64_t seed);
std::vector<SequenceDataset> train_split(const WorldConfig& world, std::size_t count);
std::vector<SequenceDataset> test_split(const WorldConfig& world, const DataOptions& data);

enum class Sweep { kGamma, kSamples, kSensors, kLatentDim, kVariants };
std::string to_string(Sweep s);
Sweep sweep_from_string(const std::string& s);

struct AblationOptions {
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::vector<double> gammas = {0.0, 0.01, 0.05, 0.1, 0.5, 1.0};
  std::vector<double> sample_fractions = {0.25, 0.5, 0.75, 1.0};
  std::vector<std::size_t> latent_dims = {2, 4, 8, 16, 32, 64};
  /// Training-set sizes (sequences) of the latent-dim sweep; n0 and 4 n0.
  std::vector<std::size_t> latent_sample_sizes = {5, 20};
  bool operator==(const AblationOptions&) const = default;
};

struct Cell {
  std::string label;
  ModelConfig model;
  std::size_t train_sequences = 0;
};

std::vector<Cell> sweep_cells(Sweep sweep, const Experiment& base, const AblationOptions& opts);

struct CellResult {
  std::string sweep;
  std::string label;
  std::uint64_t seed = 0;
  std::size_t train_sequences = 0;
  ModelConfig model;
  EvalReport report;
};

using CellCallback = std::function<void(const CellResult&)>;

/// Trains and evaluates every cell for every seed. Cells of one seed share
/// the world, training split, and test split.
std::vector<CellResult> run_sweep(Sweep sweep, const Experiment& base,
                                  const AblationOptions& opts, const CellCallback& on_cell = {});

void write_sweep_csv(std::ostream& out, std::span<const CellResult> results);

/// round(base * factor); the latent-dimension scaling rule.
std::size_t scale_dim(std::size_t base, double factor);
/// (n1 / ln n1) / (n0 / ln n0).
double nlogn_ratio(double n0, double n1);

}  // namespace ibvo
