// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ibvo/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ibvo/rng.hpp"

namespace ibvo {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kStochasticOnlyS: return "stochastic_only_s";
    case Variant::kStochasticOnlyD: return "stochastic_only_d";
    case Variant::kDeterministicBaseline: return "deterministic_baseline";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "full") return Variant::kFull;
  if (s == "stochastic_only_s") return Variant::kStochasticOnlyS;
  if (s == "stochastic_only_d") return Variant::kStochasticOnlyD;
  if (s == "deterministic_baseline") return Variant::kDeterministicBaseline;
  throw std::invalid_argument("unknown variant '" + s +
                              "' (expected full, stochastic_only_s, stochastic_only_d or "
                              "deterministic_baseline)");
}

std::string to_string(Mode m) { return m == Mode::kTrain ? "train" : "infer"; }

Mode mode_from_string(const std::string& s) {
  if (s == "train") return Mode::kTrain;
  if (s == "infer") return Mode::kInfer;
  throw std::invalid_argument("unknown rollout mode '" + s + "' (expected train or infer)");
}

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("model.") + field + ": " + what);
  };
  require(latent_dim >= 1, "latent_dim", "must be >= 1");
  require(deterministic_dim >= 1, "deterministic_dim", "must be >= 1");
  require(hidden_dim >= 1, "hidden_dim", "must be >= 1");
  require(imu_feat_dim >= 1, "imu_feat_dim", "must be >= 1");
  require(use_vis || use_imu, "sensors", "at least one sensor is required");
  require(gamma >= 0, "gamma", "must be >= 0");
  require(alpha >= 0, "alpha", "must be >= 0");
  require(beta >= 0, "beta", "must be >= 0");
  require(min_std > 0, "min_std", "must be > 0");
  require(pose_tile >= 1, "pose_tile", "must be >= 1");
  require(vis_dim >= 1, "vis_dim", "must be >= 1");
  require(imu_substeps >= 1, "imu_substeps", "must be >= 1");
  require(imu_dim >= 1, "imu_dim", "must be >= 1");
}

std::size_t ModelConfig::feature_dim() const {
  return (use_vis ? hidden_dim : 0) + (use_imu ? imu_feat_dim : 0);
}

ModelConfig with_data_shape(ModelConfig config, const SequenceDataset& ds) {
  config.vis_dim = ds.vis_dim;
  config.imu_substeps = ds.imu_substeps;
  config.imu_dim = ds.imu_dim;
  return config;
}

// ---------------------------------------------------------------------------
// Parameter layout

namespace {

struct Slot {
  std::string name;
  Shape shape;
};

void add_linear(std::vector<Slot>& out, const std::string& name, std::size_t in, std::size_t o) {
  out.push_back({name + ".w", {in, o}});
  out.push_back({name + ".b", {o}});
}

void add_gru(std::vector<Slot>& out, const std::string& name, std::size_t in, std::size_t k) {
  out.push_back({name + ".wi", {in, 3 * k}});
  out.push_back({name + ".wh", {k, 3 * k}});
  out.push_back({name + ".bi", {3 * k}});
  out.push_back({name + ".bh", {3 * k}});
}

std::vector<Slot> layout(const ModelConfig& c) {
  c.validate();
  const std::size_t H = c.hidden_dim, d = c.latent_dim, k = c.deterministic_dim;
  const std::size_t pose_in = 6 * c.pose_tile;
  std::vector<Slot> s;
  if (c.use_vis) {
    add_linear(s, "vis1", c.vis_dim, H);
    add_linear(s, "vis2", H, H);
  }
  if (c.use_imu) add_gru(s, "imu", c.imu_dim, c.imu_feat_dim);
  const std::size_t feat = c.feature_dim();
  std::size_t reg_in = d;
  switch (c.variant) {
    case Variant::kFull:
      add_linear(s, "fo_in", feat + 2 * d, H);
      add_gru(s, "fo_cell", H, k);
      add_linear(s, "fp_in", pose_in + 2 * d, H);
      add_gru(s, "fp_cell", H, k);
      add_linear(s, "head_o_mu", k, d);
      add_linear(s, "head_o_std", k, d);
      add_linear(s, "head_p_mu", k, d);
      add_linear(s, "head_p_std", k, d);
      break;
    case Variant::kStochasticOnlyS:
    case Variant::kStochasticOnlyD:
      add_linear(s, "fo_in", feat, H);
      add_gru(s, "fo_cell", H, 2 * d);
      add_linear(s, "fp_in", pose_in, H);
      add_gru(s, "fp_cell", H, 2 * d);
      break;
    case Variant::kDeterministicBaseline:
      add_linear(s, "fo_in", feat, H);
      add_gru(s, "fo_cell", H, k);
      reg_in = k;
      break;
  }
  add_linear(s, "reg1", reg_in, H);
  add_linear(s, "reg2", H, H);
  add_linear(s, "reg_t", H, 3);
  add_linear(s, "reg_r", H, 3);
  return s;
}

}  // namespace

std::size_t IBModelParams::index(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

std::size_t IBModelParams::count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

IBModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  IBModelParams p;
  std::uint64_t i = 0;
  for (auto& slot : layout(config)) {
    std::vector<double> data(shape_numel(slot.shape), 0.0);
    if (slot.shape.size() == 2) {
      Rng rng(Rng::derive(seed, {purpose(StreamPurpose::kInit), i}));
      const double limit =
          std::sqrt(6.0 / static_cast<double>(slot.shape[0] + slot.shape[1]));
      for (auto& x : data) x = rng.uniform(-limit, limit);
    }
    p.names.push_back(slot.name);
    p.tensors.emplace_back(slot.shape, std::move(data));
    ++i;
  }
  return p;
}

IBModelParams zero_params(const ModelConfig& config) {
  IBModelParams p;
  for (auto& slot : layout(config)) {
    p.names.push_back(slot.name);
    p.tensors.push_back(Tensor::zeros(slot.shape));
  }
  return p;
}

ModelVars bind_params(const ModelConfig& config, const IBModelParams& layout_params,
               std::span<const Var> vars) {
  if (vars.size() != layout_params.names.size()) {
    throw std::invalid_argument("bind: expected " + std::to_string(layout_params.names.size()) +
                                " parameter leaves, got " + std::to_string(vars.size()));
  }
  ModelVars m;
  m.config = &config;
  auto find = [&](const std::string& name) -> Var {
    const auto it = std::find(layout_params.names.begin(), layout_params.names.end(), name);
    if (it == layout_params.names.end()) return Var();
    return vars[static_cast<std::size_t>(it - layout_params.names.begin())];
  };
  auto lin = [&](const std::string& n) { return LinearVars{find(n + ".w"), find(n + ".b")}; };
  auto gru = [&](const std::string& n) {
    return GruVars{find(n + ".wi"), find(n + ".wh"), find(n + ".bi"), find(n + ".bh")};
  };
  m.vis1 = lin("vis1");
  m.vis2 = lin("vis2");
  m.imu = gru("imu");
  m.fo_in = lin("fo_in");
  m.fp_in = lin("fp_in");
  m.fo_cell = gru("fo_cell");
  m.fp_cell = gru("fp_cell");
  m.head_o_mu = lin("head_o_mu");
  m.head_o_std = lin("head_o_std");
  m.head_p_mu = lin("head_p_mu");
  m.head_p_std = lin("head_p_std");
  m.reg1 = lin("reg1");
  m.reg2 = lin("reg2");
  m.reg_t = lin("reg_t");
  m.reg_r = lin("reg_r");
  return m;
}

ModelVars bind_params(Graph& g, const ModelConfig& config, const IBModelParams& params, bool trainable) {
  const auto expected = layout(config);
  if (expected.size() != params.names.size()) {
    throw std::invalid_argument("bind: parameter set does not match the model config");
  }
  std::vector<Var> vars;
  vars.reserve(params.tensors.size());
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    if (expected[i].name != params.names[i] || expected[i].shape != params.tensors[i].shape()) {
      throw ShapeError("bind: parameter '" + params.names[i] + "' " +
                       shape_str(params.tensors[i].shape()) + " does not match expected '" +
                       expected[i].name + "' " + shape_str(expected[i].shape));
    }
    vars.push_back(trainable ? g.parameter(params.tensors[i]) : g.constant(params.tensors[i]));
  }
  return bind_params(config, params, vars);
}

// ---------------------------------------------------------------------------
// Building blocks

Var linear(const LinearVars& l, const Var& x) { return add(matmul(x, l.w), l.b); }

Var gru_cell(const GruVars& c, const Var& h_prev, const Var& x) {
  const std::size_t k = h_prev.value().dim(1);
  const Var gi = add(matmul(x, c.wi), c.bi);
  const Var gh = add(matmul(h_prev, c.wh), c.bh);
  const Var r = sigmoid(add(slice(gi, 1, 0, k), slice(gh, 1, 0, k)));
  const Var z = sigmoid(add(slice(gi, 1, k, 2 * k), slice(gh, 1, k, 2 * k)));
  const Var n = tanh(add(slice(gi, 1, 2 * k, 3 * k), mul(r, slice(gh, 1, 2 * k, 3 * k))));
  // (1 - z) * n + z * h = n + z * (h - n)
  return add(n, mul(z, sub(h_prev, n)));
}

Var encode(Graph& g, const ModelVars& m, const StepObs& obs) {
  const ModelConfig& c = *m.config;
  std::vector<Var> parts;
  if (c.use_vis) {
    if (!obs.vis) throw std::invalid_argument("encode: the model expects visual observations");
    const Var x = g.constant(*obs.vis);
    parts.push_back(linear(m.vis2, relu(linear(m.vis1, x))));
  }
  if (c.use_imu) {
    if (obs.imu.empty()) throw std::invalid_argument("encode: the model expects IMU observations");
    if (obs.imu.size() != c.imu_substeps) {
      throw ShapeError("encode: expected " + std::to_string(c.imu_substeps) +
                       " IMU substeps, got " + std::to_string(obs.imu.size()));
    }
    const std::size_t B = obs.imu.front().dim(0);
    Var h = g.constant(Tensor::zeros({B, c.imu_feat_dim}));
    for (const auto& reading : obs.imu) h = gru_cell(m.imu, h, g.constant(reading));
    parts.push_back(h);
  }
  return parts.size() == 1 ? parts.front() : concat(parts, 1);
}

Var tile_pose(const Var& xi, std::size_t times) {
  if (xi.value().rank() != 2 || xi.value().dim(1) != 6) {
    throw ShapeError("tile_pose: expected [B, 6], got " + shape_str(xi.shape()));
  }
  return tile_columns(xi, times);
}

Var obs_transition(const ModelVars& m, const Var& h_o_prev, const Var& feat, const Var& s_o_prev,
                   const Var& s_p_prev) {
  const Var x = m.config->variant == Variant::kDeterministicBaseline
                    ? feat
                    : concat({feat, s_o_prev, s_p_prev}, 1);
  return gru_cell(m.fo_cell, h_o_prev, relu(linear(m.fo_in, x)));
}

Var pose_transition(const ModelVars& m, const Var& h_p_prev, const Var& xi, const Var& s_o_prev,
                    const Var& s_p_prev) {
  if (!m.fp_in.w.valid()) throw std::logic_error("pose_transition: model has no pose path");
  const Var x = concat({tile_pose(xi, m.config->pose_tile), s_o_prev, s_p_prev}, 1);
  return gru_cell(m.fp_cell, h_p_prev, relu(linear(m.fp_in, x)));
}

GaussVars stochastic_head(const ModelVars& m, const Var& h, Path which) {
  const LinearVars& mu = which == Path::kObs ? m.head_o_mu : m.head_p_mu;
  const LinearVars& sd = which == Path::kObs ? m.head_o_std : m.head_p_std;
  if (!mu.w.valid()) throw std::logic_error("stochastic_head: model has no stochastic heads");
  return {linear(mu, h), add_scalar(softplus(linear(sd, h)), m.config->min_std)};
}

Var regress_pose(const ModelVars& m, const Var& s) {
  const Var h = relu(linear(m.reg2, relu(linear(m.reg1, s))));
  return concat({linear(m.reg_t, h), linear(m.reg_r, h)}, 1);
}

// ---------------------------------------------------------------------------
// Clips

void ClipBatch::validate(const ModelConfig& config) const {
  if (L < 1) throw std::invalid_argument("ClipBatch: L must be >= 1");
  if (B < 1) throw std::invalid_argument("ClipBatch: B must be >= 1");
  if (obs.size() != L || poses.size() != L || noise_o.size() != L || noise_p.size() != L) {
    throw ShapeError("ClipBatch: per-step arrays must have length L = " + std::to_string(L));
  }
  const Shape pose_shape{B, 6}, noise_shape{B, config.latent_dim};
  for (std::size_t t = 0; t < L; ++t) {
    if (poses[t].shape() != pose_shape) {
      throw ShapeError("ClipBatch: pose at step " + std::to_string(t) + " is " +
                       shape_str(poses[t].shape()) + ", expected " + shape_str(pose_shape));
    }
    if (noise_o[t].shape() != noise_shape || noise_p[t].shape() != noise_shape) {
      throw ShapeError("ClipBatch: noise at step " + std::to_string(t) + " is " +
                       shape_str(noise_o[t].shape()) + "/" + shape_str(noise_p[t].shape()) +
                       ", expected " + shape_str(noise_shape) + " (B, L, 2, d)");
    }
    if (config.use_vis && obs[t].vis && obs[t].vis->shape() != Shape{B, config.vis_dim}) {
      throw ShapeError("ClipBatch: vis at step " + std::to_string(t) + " is " +
                       shape_str(obs[t].vis->shape()));
    }
  }
}

ClipBatch make_clip_batch(std::span<const SequenceDataset* const> datasets,
                          std::span<const std::size_t> starts, std::size_t L,
                          const ModelConfig& config, Rng* noise) {
  if (datasets.size() != starts.size() || datasets.empty()) {
    throw std::invalid_argument("make_clip_batch: need one start per dataset");
  }
  if (L < 1) throw std::invalid_argument("make_clip_batch: L must be >= 1");
  const std::size_t B = datasets.size();
  const std::size_t d = config.latent_dim;
  ClipBatch clip;
  clip.B = B;
  clip.L = L;
  for (std::size_t b = 0; b < B; ++b) {
    if (starts[b] + L > datasets[b]->length()) {
      throw std::invalid_argument("make_clip_batch: window [" + std::to_string(starts[b]) + ", " +
                                  std::to_string(starts[b] + L) + ") exceeds a sequence of " +
                                  std::to_string(datasets[b]->length()) + " frame-pairs");
    }
  }
  for (std::size_t t = 0; t < L; ++t) {
    StepObs obs;
    if (config.use_vis) {
      std::vector<double> v;
      v.reserve(B * config.vis_dim);
      for (std::size_t b = 0; b < B; ++b) {
        const auto row = datasets[b]->vis_row(starts[b] + t);
        if (row.size() != config.vis_dim) throw ShapeError("make_clip_batch: vis_dim mismatch");
        v.insert(v.end(), row.begin(), row.end());
      }
      obs.vis = Tensor({B, config.vis_dim}, std::move(v));
    }
    if (config.use_imu) {
      for (std::size_t k = 0; k < config.imu_substeps; ++k) {
        std::vector<double> v;
        v.reserve(B * config.imu_dim);
        for (std::size_t b = 0; b < B; ++b) {
          const SequenceDataset& ds = *datasets[b];
          if (ds.imu_substeps != config.imu_substeps || ds.imu_dim != config.imu_dim) {
            throw ShapeError("make_clip_batch: IMU shape mismatch");
          }
          const auto frame = ds.imu_frame(starts[b] + t);
          v.insert(v.end(), frame.begin() + k * config.imu_dim,
                   frame.begin() + (k + 1) * config.imu_dim);
        }
        obs.imu.emplace_back(Shape{B, config.imu_dim}, std::move(v));
      }
    }
    clip.obs.push_back(std::move(obs));
    std::vector<double> p;
    p.reserve(B * 6);
    for (std::size_t b = 0; b < B; ++b) {
      const auto v = datasets[b]->pose(starts[b] + t).vec();
      p.insert(p.end(), v.begin(), v.end());
    }
    clip.poses.emplace_back(Shape{B, 6}, std::move(p));
  }
  for (std::size_t t = 0; t < L; ++t) {
    if (noise) {
      clip.noise_o.emplace_back(Shape{B, d}, noise->normals(B * d, 1.0));
      clip.noise_p.emplace_back(Shape{B, d}, noise->normals(B * d, 1.0));
    } else {
      clip.noise_o.push_back(Tensor::zeros({B, d}));
      clip.noise_p.push_back(Tensor::zeros({B, d}));
    }
  }
  return clip;
}

Pose6 pose_row(const Tensor& poses, std::size_t b) {
  return Pose6::from_vec(poses.data().subspan(b * 6, 6));
}

// ---------------------------------------------------------------------------
// Rollout

namespace {

GaussVars split_residue(const Var& out, std::size_t d, double min_std) {
  return {slice(out, 1, 0, d), add_scalar(softplus(slice(out, 1, d, 2 * d)), min_std)};
}

std::string step_context(std::size_t t, const std::exception& e) {
  return "step " + std::to_string(t) + ": " + e.what();
}

}  // namespace

std::vector<StepVars> rollout(Graph& g, const ModelVars& m, const ClipBatch& clip, Mode mode) {
  const ModelConfig& c = *m.config;
  clip.validate(c);
  const std::size_t B = clip.B, d = c.latent_dim, k = c.deterministic_dim;
  const bool stochastic_only =
      c.variant == Variant::kStochasticOnlyS || c.variant == Variant::kStochasticOnlyD;

  Var h_o = g.constant(Tensor::zeros({B, k}));
  Var h_p = h_o;
  Var s_o = g.constant(Tensor::zeros({B, d}));
  Var s_p = s_o;
  Var prev_pred;

  std::vector<StepVars> steps;
  steps.reserve(clip.L);
  for (std::size_t t = 0; t < clip.L; ++t) {
    try {
      StepVars st;
      const Var feat = encode(g, m, clip.obs[t]);
      if (c.variant == Variant::kDeterministicBaseline) {
        st.h_o = h_o = obs_transition(m, h_o, feat, s_o, s_p);
        st.pred = regress_pose(m, h_o);
        prev_pred = st.pred;
        steps.push_back(st);
        continue;
      }

      Var xi;
      if (mode == Mode::kTrain) {
        xi = g.constant(clip.poses[t]);
        st.pose_source = PoseSource::kGroundTruth;
      } else if (prev_pred.valid()) {
        xi = prev_pred;
        st.pose_source = PoseSource::kPrediction;
      } else {
        xi = g.constant(Tensor::zeros({B, 6}));
        st.pose_source = PoseSource::kZero;
      }

      if (stochastic_only) {
        const bool shared = c.variant == Variant::kStochasticOnlyS;
        const Var ctx_o = shared ? concat({s_o, s_o}, 1) : concat({s_o, s_p}, 1);
        const Var ctx_p = shared ? concat({s_p, s_p}, 1) : concat({s_o, s_p}, 1);
        const Var out_o = gru_cell(m.fo_cell, ctx_o, relu(linear(m.fo_in, feat)));
        const Var x_p = relu(linear(m.fp_in, tile_pose(xi, c.pose_tile)));
        const Var out_p = gru_cell(m.fp_cell, ctx_p, x_p);
        st.o = split_residue(out_o, d, c.min_std);
        st.p = split_residue(out_p, d, c.min_std);
      } else {
        const Var h_o_new = obs_transition(m, h_o, feat, s_o, s_p);
        const Var h_p_new = pose_transition(m, h_p, xi, s_o, s_p);
        st.h_o = h_o = h_o_new;
        st.h_p = h_p = h_p_new;
        st.o = stochastic_head(m, h_o, Path::kObs);
        st.p = stochastic_head(m, h_p, Path::kPose);
      }
      st.s_o = s_o = gaussian_sample(st.o.mu, st.o.std, g.constant(clip.noise_o[t]));
      st.s_p = s_p = gaussian_sample(st.p.mu, st.p.std, g.constant(clip.noise_p[t]));
      st.pred = regress_pose(m, s_o);
      st.kl = scale(kl_diag_gauss(st.o.mu, st.o.std, st.p.mu, st.p.std),
                    1.0 / static_cast<double>(B));
      prev_pred = st.pred;
      steps.push_back(st);
    } catch (const NumericError& e) {
      throw NumericError(step_context(t, e));
    }
  }
  return steps;
}

std::vector<StepResult> rollout(const ClipBatch& clip, const ModelConfig& config,
                                const IBModelParams& params, Mode mode) {
  Graph g;
  const ModelVars m = bind_params(g, config, params, false);
  const auto steps = rollout(g, m, clip, mode);
  auto val = [](const Var& v) { return v.valid() ? v.value() : Tensor(); };
  std::vector<StepResult> out;
  out.reserve(steps.size());
  for (const auto& st : steps) {
    StepResult r;
    r.belief = {val(st.h_o),  val(st.h_p),  val(st.o.mu), val(st.o.std),
                val(st.p.mu), val(st.p.std), val(st.s_o), val(st.s_p)};
    r.pred = st.pred.value();
    r.kl = st.kl.valid() ? st.kl.value().item() : 0.0;
    r.pose_source = st.pose_source;
    out.push_back(std::move(r));
  }
  return out;
}

LossVars clip_loss(Graph& g, const ModelVars& m, const ClipBatch& clip) {
  const ModelConfig& c = *m.config;
  const auto steps = rollout(g, m, clip, Mode::kTrain);
  Var pose_term, kl_term;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    try {
      const Var err = sub(steps[t].pred, g.constant(clip.poses[t]));
      const Var et = l2_norm(slice(err, 1, 0, 3), 1);
      const Var er = l2_norm(slice(err, 1, 3, 6), 1);
      const Var step_pose = mean(add(scale(et, c.alpha), scale(er, c.beta)));
      pose_term = pose_term.valid() ? add(pose_term, step_pose) : step_pose;
      if (steps[t].kl.valid()) kl_term = kl_term.valid() ? add(kl_term, steps[t].kl) : steps[t].kl;
    } catch (const NumericError& e) {
      throw NumericError(step_context(t, e));
    }
  }
  if (!kl_term.valid()) kl_term = g.constant(Tensor::scalar(0.0));
  const Var total = c.stochastic() && c.gamma != 0.0 ? add(pose_term, scale(kl_term, c.gamma))
                                                     : pose_term;
  return {total, pose_term, kl_term};
}

double clip_loss(const ClipBatch& clip, const ModelConfig& config, const IBModelParams& params) {
  Graph g;
  const ModelVars m = bind_params(g, config, params, false);
  return clip_loss(g, m, clip).total.value().item();
}

}  // namespace ibvo
