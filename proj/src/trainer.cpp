// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ibvo/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "ibvo/checkpoint.hpp"

namespace ibvo {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "sgd"; }

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "adam") return OptimizerKind::kAdam;
  if (s == "sgd") return OptimizerKind::kSgd;
  throw std::invalid_argument("unknown optimizer '" + s + "' (expected adam or sgd)");
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw std::invalid_argument("train." + field + ": " + what);
  };
  require(epochs >= 1, "epochs", "must be >= 1");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(clip_len >= 1, "clip_len", "must be >= 1");
  require(lr_initial > 0 && std::isfinite(lr_initial), "lr_initial", "must be positive");
  require(adam_beta1 >= 0 && adam_beta1 < 1, "adam_beta1", "must be in [0, 1)");
  require(adam_beta2 >= 0 && adam_beta2 < 1, "adam_beta2", "must be in [0, 1)");
  require(adam_eps > 0, "adam_eps", "must be > 0");
  require(grad_clip_norm > 0, "grad_clip_norm", "must be > 0");
  double prev_lr = lr_initial;
  std::size_t prev_epoch = 0;
  const auto ms = milestones();
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const std::string f = "lr_milestones[" + std::to_string(i) + "]";
    require(i == 0 || ms[i].epoch > prev_epoch, f, "epochs must be strictly increasing");
    require(ms[i].lr > 0, f, "lr must be positive");
    require(ms[i].lr <= prev_lr, f, "lrs must be non-increasing");
    prev_lr = ms[i].lr;
    prev_epoch = ms[i].epoch;
  }
}

std::vector<Milestone> TrainConfig::milestones() const {
  if (lr_milestones) return *lr_milestones;
  if (epochs / 2 == 5 * epochs / 6) return {{epochs / 2, 5e-6}};
  return {{epochs / 2, 1e-5}, {5 * epochs / 6, 5e-6}};
}

double TrainConfig::lr_at(std::size_t epoch) const {
  double lr = lr_initial;
  for (const auto& m : milestones()) {
    if (epoch >= m.epoch) lr = m.lr;
  }
  return lr;
}

void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> log) {
  out << kMetricsHeader << '\n';
  out << std::setprecision(17);
  for (const auto& m : log) {
    out << m.epoch << ',' << m.loss << ',' << m.pose_term << ',' << m.kl_term << ',' << m.lr
        << ',' << m.seconds << '\n';
  }
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const EpochMetrics> log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_metrics_csv(out, log);
}

double clip_global_norm(std::vector<std::vector<double>>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (std::isfinite(max_norm) && norm > max_norm) {
    const double f = max_norm / norm;
    for (auto& g : grads) {
      for (double& x : g) x *= f;
    }
  }
  return norm;
}

void apply_update(std::vector<Tensor>& params, const std::vector<std::vector<double>>& grads,
                  OptimizerState& state, const TrainConfig& config, double lr) {
  if (grads.size() != params.size()) throw std::invalid_argument("apply_update: size mismatch");
  ++state.step;
  if (config.optimizer == OptimizerKind::kAdam && state.m.size() != params.size()) {
    state.m.assign(params.size(), {});
    state.v.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i].size(), 0.0);
      state.v[i].assign(params[i].size(), 0.0);
    }
  }
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<double> w = params[i].values();
    const auto& g = grads[i];
    if (g.size() != w.size()) throw std::invalid_argument("apply_update: gradient size mismatch");
    if (config.optimizer == OptimizerKind::kSgd) {
      for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * g[j];
    } else {
      auto& m = state.m[i];
      auto& v = state.v[i];
      for (std::size_t j = 0; j < w.size(); ++j) {
        m[j] = b1 * m[j] + (1.0 - b1) * g[j];
        v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
        w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + config.adam_eps);
      }
    }
    params[i] = Tensor(params[i].shape(), std::move(w));
  }
}

TrainState init_train_state(const ModelConfig& model, const TrainConfig& train) {
  model.validate();
  train.validate();
  TrainState s;
  s.params = init_params(model, train.seed);
  s.shuffle = Rng(Rng::derive(train.seed, {purpose(StreamPurpose::kShuffle)}));
  return s;
}

std::vector<std::pair<std::size_t, std::size_t>> clip_windows(
    std::span<const SequenceDataset> datasets, std::size_t L) {
  std::vector<std::pair<std::size_t, std::size_t>> w;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const std::size_t T = datasets[i].length();
    if (T < L) continue;
    for (std::size_t s = 0; s + L <= T; ++s) w.emplace_back(i, s);
  }
  return w;
}

void train_epochs(TrainState& state, std::span<const SequenceDataset> datasets,
                  const ModelConfig& model, const TrainConfig& train, std::size_t until_epoch,
                  const TrainHooks& hooks) {
  model.validate();
  train.validate();
  if (datasets.empty()) throw std::invalid_argument("train: no training sequences");
  const auto windows = clip_windows(datasets, train.clip_len);
  if (windows.empty()) {
    throw std::invalid_argument("train: no sequence holds a clip of " +
                                std::to_string(train.clip_len) + " frame-pairs");
  }

  while (state.epoch < until_epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    TrainState next = state;
    const std::size_t epoch = next.epoch;
    const double lr = train.lr_at(epoch);

    std::vector<std::size_t> order(windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[next.shuffle.below(i)]);
    }

    double loss_sum = 0.0, pose_sum = 0.0, kl_sum = 0.0;
    std::size_t batch = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += train.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), begin + train.batch_size);
      std::vector<const SequenceDataset*> seqs;
      std::vector<std::size_t> starts;
      for (std::size_t i = begin; i < end; ++i) {
        seqs.push_back(&datasets[windows[order[i]].first]);
        starts.push_back(windows[order[i]].second);
      }
      Rng noise(Rng::derive(train.seed, {purpose(StreamPurpose::kClipNoise), epoch, batch}));
      const ClipBatch clip = make_clip_batch(seqs, starts, train.clip_len, model, &noise);

      Graph g;
      std::vector<Var> leaves;
      leaves.reserve(next.params.tensors.size());
      for (const auto& t : next.params.tensors) leaves.push_back(g.parameter(t));
      const ModelVars m = bind_params(model, next.params, leaves);
      LossVars loss;
      try {
        loss = clip_loss(g, m, clip);
        g.backward(loss.total);
      } catch (const NumericError& e) {
        throw TrainingDivergedError("epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(batch) + ": " + e.what());
      }
      std::vector<std::vector<double>> grads;
      grads.reserve(leaves.size());
      for (const auto& v : leaves) grads.push_back(g.grad(v).values());
      clip_global_norm(grads, train.grad_clip_norm);
      apply_update(next.params.tensors, grads, next.optimizer, train, lr);

      const double n = static_cast<double>(end - begin);
      loss_sum += n * loss.total.value().item();
      pose_sum += n * loss.pose_term.value().item();
      kl_sum += n * loss.kl_term.value().item();
    }

    const double n = static_cast<double>(windows.size());
    EpochMetrics em{epoch, loss_sum / n, pose_sum / n, kl_sum / n, lr, 0.0};
    if (!std::isfinite(em.loss)) {
      throw TrainingDivergedError("epoch " + std::to_string(epoch) + ": loss is not finite");
    }
    if (train.record_wall_clock) {
      em.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    next.log.push_back(em);
    next.epoch = epoch + 1;
    state = std::move(next);
    if (hooks.checkpoint) save_checkpoint(*hooks.checkpoint, model, train, state);
    if (hooks.on_epoch) hooks.on_epoch(em);
  }
}

TrainResult train(std::span<const SequenceDataset> datasets, const ModelConfig& model,
                  const TrainConfig& train, const TrainHooks& hooks) {
  TrainState state = init_train_state(model, train);
  train_epochs(state, datasets, model, train, train.epochs, hooks);
  return {std::move(state.params), std::move(state.log)};
}

}  // namespace ibvo
