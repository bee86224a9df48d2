// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ibvo/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ibvo/rng.hpp"

namespace ibvo {

// ---------------------------------------------------------------------------
// Refinement

double wrapped_angle_mean(std::span<const double> angles) {
  if (angles.empty()) throw std::invalid_argument("wrapped_angle_mean: empty input");
  const double ref = angles.front();
  double acc = 0.0;
  for (double a : angles) acc += wrap_angle(a - ref);
  return wrap_angle(ref + acc / static_cast<double>(angles.size()));
}

namespace {

Pose6 average(std::span<const Pose6> preds) {
  Pose6 out;
  const double n = static_cast<double>(preds.size());
  for (int k = 0; k < 3; ++k) {
    double t = 0.0;
    std::vector<double> r;
    r.reserve(preds.size());
    for (const auto& p : preds) {
      t += p.t[k];
      r.push_back(p.r[k]);
    }
    out.t[k] = t / n;
    out.r[k] = wrapped_angle_mean(r);
  }
  return out;
}

}  // namespace

Pose6 refine(std::span<const Pose6> by_position, bool* passthrough) {
  if (by_position.empty()) throw std::invalid_argument("refine: no predictions");
  if (by_position.size() == 1) {
    if (passthrough) *passthrough = true;
    std::clog << "warning: refine with a single clip position passes the prediction through\n";
    return by_position.front();
  }
  if (passthrough) *passthrough = false;
  return average(by_position.subspan(1));
}

Pose6 refine_available(std::span<const std::size_t> positions, std::span<const Pose6> preds) {
  if (positions.size() != preds.size() || preds.empty()) {
    throw std::invalid_argument("refine_available: need one position per prediction");
  }
  if (preds.size() == 1) return preds.front();
  const std::size_t skip = positions.front() == 0 ? 1 : 0;
  return average(preds.subspan(skip));
}

// ---------------------------------------------------------------------------
// Sliding-window rollouts

namespace {

struct WindowRun {
  std::size_t windows = 0;
  std::vector<StepResult> steps;  // L steps, rows are windows
};

WindowRun run_windows(const IBModelParams& params, const ModelConfig& config,
                      const SequenceDataset& ds, std::size_t L) {
  if (ds.length() < L) {
    throw std::invalid_argument("evaluate: sequence " + std::to_string(ds.meta.index) + " has " +
                                std::to_string(ds.length()) + " frame-pairs, fewer than L = " +
                                std::to_string(L));
  }
  WindowRun run;
  run.windows = ds.length() - L + 1;
  std::vector<const SequenceDataset*> seqs(run.windows, &ds);
  std::vector<std::size_t> starts(run.windows);
  for (std::size_t s = 0; s < run.windows; ++s) starts[s] = s;
  const ClipBatch clip = make_clip_batch(seqs, starts, L, config, nullptr);
  run.steps = rollout(clip, config, params, Mode::kInfer);
  return run;
}

double row_mean_square(const Tensor& t, std::size_t row) {
  if (t.rank() != 2) return 0.0;
  const std::size_t w = t.dim(1);
  double acc = 0.0;
  for (std::size_t j = 0; j < w; ++j) {
    const double v = t[row * w + j];
    acc += v * v;
  }
  return acc / static_cast<double>(w);
}

void pose_sq_error(const Pose6& p, const Pose6& g, double& st, double& sr) {
  for (int k = 0; k < 3; ++k) {
    const double dt = p.t[k] - g.t[k];
    const double dr = wrap_angle(p.r[k] - g.r[k]);
    st += dt * dt;
    sr += dr * dr;
  }
}

double rmse_of(double sum, std::size_t n) {
  return n ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
}

}  // namespace

EvalReport evaluate(const IBModelParams& params, const ModelConfig& config,
                    std::span<const SequenceDataset> datasets, std::size_t L) {
  if (L < 1) throw std::invalid_argument("evaluate: L must be >= 1");
  if (datasets.empty()) throw std::invalid_argument("evaluate: no sequences");
  EvalReport rep;
  rep.L = L;
  std::vector<double> pos_st(L, 0.0), pos_sr(L, 0.0), pos_s2(L, 0.0), pos_s2p(L, 0.0);
  rep.pos_count.assign(L, 0);
  double st_all = 0.0, sr_all = 0.0;

  for (const auto& ds : datasets) {
    const WindowRun run = run_windows(params, config, ds, L);
    const std::size_t T = ds.length();
    std::vector<std::vector<std::size_t>> positions(T);
    std::vector<std::vector<Pose6>> preds(T);
    double seq_s2 = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
      const StepResult& step = run.steps[j];
      for (std::size_t s = 0; s < run.windows; ++s) {
        const std::size_t pair = s + j;
        const Pose6 p = pose_row(step.pred, s);
        positions[pair].push_back(j);
        preds[pair].push_back(p);
        pose_sq_error(p, ds.pose(pair), pos_st[j], pos_sr[j]);
        const double s2 = row_mean_square(step.belief.std_o, s);
        pos_s2[j] += s2;
        pos_s2p[j] += row_mean_square(step.belief.std_p, s);
        seq_s2 += s2;
        ++rep.pos_count[j];
      }
    }
    // Positions arrive in ascending order because j is the outer loop.
    double st = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
      const Pose6 r = refine_available(positions[i], preds[i]);
      pose_sq_error(r, ds.pose(i), st, sr);
    }
    st_all += st;
    sr_all += sr;
    rep.pairs += T;
    rep.sequences.push_back({ds.meta.index, rmse_of(st, T), rad2deg(rmse_of(sr, T)),
                             seq_s2 / static_cast<double>(run.windows * L)});
  }

  rep.t_rmse = rmse_of(st_all, rep.pairs);
  rep.r_rmse = rad2deg(rmse_of(sr_all, rep.pairs));
  double s2_all = 0.0, s2p_all = 0.0;
  std::size_t n_all = 0;
  for (std::size_t j = 0; j < L; ++j) {
    const std::size_t n = rep.pos_count[j];
    rep.pos_t_rmse.push_back(rmse_of(pos_st[j], n));
    rep.pos_r_rmse.push_back(rad2deg(rmse_of(pos_sr[j], n)));
    rep.pos_sigma2.push_back(n ? pos_s2[j] / static_cast<double>(n) : 0.0);
    s2_all += pos_s2[j];
    s2p_all += pos_s2p[j];
    n_all += n;
  }
  rep.sigma2 = n_all ? s2_all / static_cast<double>(n_all) : 0.0;
  rep.sigma2_p = n_all ? s2p_all / static_cast<double>(n_all) : 0.0;
  return rep;
}

UncertaintyReport uncertainty(const IBModelParams& params, const ModelConfig& config,
                              std::span<const SequenceDataset> datasets, std::size_t L,
                              std::size_t bins) {
  if (bins < 1) throw std::invalid_argument("uncertainty: bins must be >= 1");
  std::vector<double> s2, turn, fwd;
  for (const auto& ds : datasets) {
    const WindowRun run = run_windows(params, config, ds, L);
    for (std::size_t j = 0; j < L; ++j) {
      for (std::size_t s = 0; s < run.windows; ++s) {
        const Pose6& gt = ds.pose(s + j);
        s2.push_back(row_mean_square(run.steps[j].belief.std_o, s));
        turn.push_back(geodesic_angle(Pose6::identity(), gt));
        fwd.push_back(gt.t[0]);
      }
    }
  }
  UncertaintyReport rep;
  if (s2.empty()) return rep;
  double acc = 0.0;
  for (double v : s2) acc += v;
  rep.sigma2 = acc / static_cast<double>(s2.size());

  auto bin = [&](const std::vector<double>& key) {
    const auto [lo_it, hi_it] = std::minmax_element(key.begin(), key.end());
    const double lo = *lo_it, hi = *hi_it;
    const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
    std::vector<UncertaintyBin> out(bins);
    for (std::size_t b = 0; b < bins; ++b) {
      out[b].lo = lo + width * static_cast<double>(b);
      out[b].hi = lo + width * static_cast<double>(b + 1);
    }
    for (std::size_t i = 0; i < key.size(); ++i) {
      std::size_t b = static_cast<std::size_t>((key[i] - lo) / width);
      b = std::min(b, bins - 1);
      ++out[b].count;
      out[b].sigma2 += s2[i];
    }
    for (auto& b : out) {
      if (b.count) b.sigma2 /= static_cast<double>(b.count);
    }
    return out;
  };
  rep.by_turn = bin(turn);
  rep.by_forward = bin(fwd);
  return rep;
}

void write_eval_csv(std::ostream& out, const EvalReport& r) {
  out << std::setprecision(17);
  out << "position,count,t_rmse,r_rmse,sigma2\n";
  for (std::size_t j = 0; j < r.L; ++j) {
    out << j << ',' << r.pos_count[j] << ',' << r.pos_t_rmse[j] << ',' << r.pos_r_rmse[j] << ','
        << r.pos_sigma2[j] << '\n';
  }
  out << "refined," << r.pairs << ',' << r.t_rmse << ',' << r.r_rmse << ',' << r.sigma2 << '\n';
}

// ---------------------------------------------------------------------------
// Nuisance probe

ProbeData probe_latents(const IBModelParams& params, const ModelConfig& config,
                        std::span<const SequenceDataset> datasets, std::size_t L,
                        std::uint64_t seed) {
  ProbeData out;
  for (const auto& ds : datasets) {
    std::vector<const SequenceDataset*> seqs;
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + L <= ds.length(); s += L) {
      seqs.push_back(&ds);
      starts.push_back(s);
    }
    if (seqs.empty()) continue;
    Rng noise(Rng::derive(seed, {purpose(StreamPurpose::kProbe), ds.meta.index}));
    const ClipBatch clip = make_clip_batch(seqs, starts, L, config, &noise);
    const auto steps = rollout(clip, config, params, Mode::kInfer);
    for (const auto& st : steps) {
      const Tensor& z = config.stochastic() ? st.belief.s_o : st.belief.h_o;
      const std::size_t w = z.dim(1);
      for (std::size_t b = 0; b < clip.B; ++b) {
        out.x.emplace_back(z.data().begin() + b * w, z.data().begin() + (b + 1) * w);
        out.y.push_back(ds.nuisance);
      }
    }
  }
  return out;
}

ProbeData probe_observations(std::span<const SequenceDataset> datasets) {
  ProbeData out;
  for (const auto& ds : datasets) {
    for (std::size_t t = 0; t < ds.length(); ++t) {
      const auto row = ds.vis_row(t);
      out.x.emplace_back(row.begin(), row.end());
      out.y.push_back(ds.nuisance);
    }
  }
  return out;
}

ProbeData probe_noise(const ProbeData& like, std::size_t dim, std::uint64_t seed) {
  ProbeData out;
  out.y = like.y;
  Rng rng(Rng::derive(seed, {purpose(StreamPurpose::kProbe), 0xA015E}));
  out.x.reserve(like.y.size());
  for (std::size_t i = 0; i < like.y.size(); ++i) out.x.push_back(rng.normals(dim, 1.0));
  return out;
}

double constant_predictor_mse(const ProbeData& train, const ProbeData& test) {
  if (train.y.empty() || test.y.empty()) throw std::invalid_argument("probe: empty data");
  const std::size_t m = train.y.front().size();
  std::vector<double> mean(m, 0.0);
  for (const auto& y : train.y) {
    for (std::size_t j = 0; j < m; ++j) mean[j] += y[j];
  }
  for (auto& v : mean) v /= static_cast<double>(train.y.size());
  double acc = 0.0;
  for (const auto& y : test.y) {
    for (std::size_t j = 0; j < m; ++j) acc += (y[j] - mean[j]) * (y[j] - mean[j]);
  }
  return acc / static_cast<double>(test.y.size() * m);
}

namespace {

Tensor rows_tensor(const std::vector<std::vector<double>>& rows, std::span<const std::size_t> idx,
                   std::span<const double> mean = {}, std::span<const double> inv_std = {}) {
  const std::size_t w = rows[idx.front()].size();
  std::vector<double> data;
  data.reserve(idx.size() * w);
  for (std::size_t i : idx) {
    for (std::size_t j = 0; j < w; ++j) {
      const double v = rows[i][j];
      data.push_back(mean.empty() ? v : (v - mean[j]) * inv_std[j]);
    }
  }
  return Tensor({idx.size(), w}, std::move(data));
}

struct Mlp3 {
  std::vector<Tensor> p;  // w1 b1 w2 b2 w3 b3

  Var forward(Graph& g, std::span<const Var> v, const Var& x) const {
    (void)g;
    const Var h1 = relu(add(matmul(x, v[0]), v[1]));
    const Var h2 = relu(add(matmul(h1, v[2]), v[3]));
    return add(matmul(h2, v[4]), v[5]);
  }
};

}  // namespace

double fit_probe(const ProbeData& train, const ProbeData& test, std::size_t hidden,
                 const ProbeConfig& config) {
  if (train.x.empty() || test.x.empty()) throw std::invalid_argument("probe: empty data");
  const std::size_t in = train.x.front().size(), out = train.y.front().size();

  // Hold out the last fifth of the training rows to pick the stopping epoch.
  const std::size_t n_val = std::max<std::size_t>(1, train.x.size() / 5);
  const std::size_t n_fit = train.x.size() - n_val;
  if (n_fit < 1) throw std::invalid_argument("probe: too few training rows");

  std::vector<double> x_mean(in, 0.0), inv_std(in, 0.0), y_mean(out, 0.0);
  for (std::size_t i = 0; i < n_fit; ++i) {
    for (std::size_t j = 0; j < in; ++j) x_mean[j] += train.x[i][j];
    for (std::size_t j = 0; j < out; ++j) y_mean[j] += train.y[i][j];
  }
  for (auto& v : x_mean) v /= static_cast<double>(n_fit);
  for (auto& v : y_mean) v /= static_cast<double>(n_fit);
  for (std::size_t i = 0; i < n_fit; ++i) {
    for (std::size_t j = 0; j < in; ++j) {
      inv_std[j] += (train.x[i][j] - x_mean[j]) * (train.x[i][j] - x_mean[j]);
    }
  }
  for (auto& v : inv_std) v = 1.0 / std::sqrt(v / static_cast<double>(n_fit) + 1e-12);

  Mlp3 net;
  Rng init(Rng::derive(config.seed, {purpose(StreamPurpose::kProbe), hidden, in}));
  auto glorot = [&](std::size_t a, std::size_t b) {
    const double lim = std::sqrt(6.0 / static_cast<double>(a + b));
    std::vector<double> w(a * b);
    for (auto& x : w) x = init.uniform(-lim, lim);
    return Tensor({a, b}, std::move(w));
  };
  net.p = {glorot(in, hidden), Tensor::zeros({hidden}), glorot(hidden, hidden),
           Tensor::zeros({hidden}), glorot(hidden, out), Tensor::vector(y_mean)};

  std::vector<std::size_t> fit_idx(n_fit), val_idx(n_val), test_idx(test.x.size());
  for (std::size_t i = 0; i < n_fit; ++i) fit_idx[i] = i;
  for (std::size_t i = 0; i < n_val; ++i) val_idx[i] = n_fit + i;
  for (std::size_t i = 0; i < test.x.size(); ++i) test_idx[i] = i;
  const Tensor x_val = rows_tensor(train.x, val_idx, x_mean, inv_std);
  const Tensor y_val = rows_tensor(train.y, val_idx);
  const Tensor x_test = rows_tensor(test.x, test_idx, x_mean, inv_std);
  const Tensor y_test = rows_tensor(test.y, test_idx);

  TrainConfig opt;
  opt.optimizer = OptimizerKind::kAdam;
  OptimizerState state;
  Rng shuffle(Rng::derive(config.seed, {purpose(StreamPurpose::kProbe), hidden, in, 1}));
  std::vector<Tensor> best = net.p;
  double best_val = std::numeric_limits<double>::infinity();

  auto eval_mse = [&](const std::vector<Tensor>& p, const Tensor& x, const Tensor& y) {
    Graph g;
    std::vector<Var> v;
    for (const auto& t : p) v.push_back(g.constant(t));
    const Var pred = net.forward(g, v, g.constant(x));
    return mean(square(sub(pred, g.constant(y)))).value().item();
  };

  for (std::size_t epoch = 0; epoch <= config.epochs; ++epoch) {
    const double val = eval_mse(net.p, x_val, y_val);
    if (val < best_val) {
      best_val = val;
      best = net.p;
    }
    if (epoch == config.epochs) break;
    for (std::size_t i = fit_idx.size(); i > 1; --i) {
      std::swap(fit_idx[i - 1], fit_idx[shuffle.below(i)]);
    }
    for (std::size_t b = 0; b < fit_idx.size(); b += config.batch_size) {
      const std::size_t e = std::min(fit_idx.size(), b + config.batch_size);
      const std::span<const std::size_t> idx(fit_idx.data() + b, e - b);
      Graph g;
      std::vector<Var> v;
      for (const auto& t : net.p) v.push_back(g.parameter(t));
      const Var pred = net.forward(g, v, g.constant(rows_tensor(train.x, idx, x_mean, inv_std)));
      const Var loss = mean(square(sub(pred, g.constant(rows_tensor(train.y, idx)))));
      g.backward(loss);
      std::vector<std::vector<double>> grads;
      for (const auto& x : v) grads.push_back(g.grad(x).values());
      apply_update(net.p, grads, state, opt, config.lr);
    }
  }
  return eval_mse(best, x_test, y_test);
}

std::vector<ProbeRow> nuisance_probe(const ProbedModel& baseline, const ProbedModel& ib,
                                     std::span<const SequenceDataset> train,
                                     std::span<const SequenceDataset> test,
                                     const ProbeConfig& config) {
  const std::size_t L = config.clip_len;
  const ProbeData base_train =
      probe_latents(*baseline.params, *baseline.config, train, L, config.seed);
  const ProbeData base_test =
      probe_latents(*baseline.params, *baseline.config, test, L, config.seed + 1);
  const ProbeData ib_train = probe_latents(*ib.params, *ib.config, train, L, config.seed);
  const ProbeData ib_test = probe_latents(*ib.params, *ib.config, test, L, config.seed + 1);
  const std::size_t dim = ib_train.x.front().size();
  const ProbeData noise_train = probe_noise(ib_train, dim, config.seed);
  const ProbeData noise_test = probe_noise(ib_test, dim, config.seed + 1);
  const double constant = constant_predictor_mse(ib_train, ib_test);

  std::vector<ProbeRow> rows;
  for (std::size_t h : config.hidden) {
    ProbeRow r;
    r.hidden = h;
    r.mse_baseline = fit_probe(base_train, base_test, h, config);
    r.mse_ib = fit_probe(ib_train, ib_test, h, config);
    r.mse_noise = fit_probe(noise_train, noise_test, h, config);
    r.mse_constant = constant;
    rows.push_back(r);
  }
  return rows;
}

void write_probe_csv(std::ostream& out, std::span<const ProbeRow> rows) {
  out << std::setprecision(17);
  out << "hidden,mse_baseline,mse_ib,mse_noise,mse_constant\n";
  for (const auto& r : rows) {
    out << r.hidden << ',' << r.mse_baseline << ',' << r.mse_ib << ',' << r.mse_noise << ','
        << r.mse_constant << '\n';
  }
}

// ---------------------------------------------------------------------------
// Experiments

WorldConfig world_for_seed(const WorldConfig& base, std::uint64_t seed) {
  WorldConfig w = base;
  w.seed = base.seed + seed;
  w.family_seed = base.family_seed + seed;
  return w;
}

std::vector<SequenceDataset> train_split(const WorldConfig& world, std::size_t count) {
  return generate_sequences(world, count, 0);
}

std::vector<SequenceDataset> test_split(const WorldConfig& world, const DataOptions& data) {
  WorldConfig w = world;
  w.nuisance_shift = data.test_nuisance_shift;
  return generate_sequences(w, data.test_sequences, kTestIndexBase);
}

std::string to_string(Sweep s) {
  switch (s) {
    case Sweep::kGamma: return "gamma";
    case Sweep::kSamples: return "samples";
    case Sweep::kSensors: return "sensors";
    case Sweep::kLatentDim: return "latent-dim";
    case Sweep::kVariants: return "variants";
  }
  return "?";
}

Sweep sweep_from_string(const std::string& s) {
  if (s == "gamma") return Sweep::kGamma;
  if (s == "samples") return Sweep::kSamples;
  if (s == "sensors") return Sweep::kSensors;
  if (s == "latent-dim") return Sweep::kLatentDim;
  if (s == "variants") return Sweep::kVariants;
  throw std::invalid_argument("unknown sweep '" + s +
                              "' (expected gamma, samples, sensors, latent-dim or variants)");
}

std::vector<Cell> sweep_cells(Sweep sweep, const Experiment& base, const AblationOptions& opts) {
  std::vector<Cell> cells;
  const std::size_t n = base.data.train_sequences;
  auto cell = [&](std::string label) {
    Cell c;
    c.label = std::move(label);
    c.model = base.model;
    c.train_sequences = n;
    return c;
  };
  switch (sweep) {
    case Sweep::kGamma:
      for (double g : opts.gammas) {
        std::ostringstream os;
        os << "gamma=" << g;
        Cell c = cell(os.str());
        c.model.gamma = g;
        cells.push_back(c);
      }
      break;
    case Sweep::kSamples:
      for (double f : opts.sample_fractions) {
        std::ostringstream os;
        os << "fraction=" << f;
        Cell c = cell(os.str());
        c.train_sequences =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(f * double(n))));
        cells.push_back(c);
      }
      break;
    case Sweep::kSensors: {
      Cell imu = cell("imu-only");
      imu.model.use_vis = false;
      imu.model.use_imu = true;
      Cell vis = cell("vis-only");
      vis.model.use_vis = true;
      vis.model.use_imu = false;
      Cell both = cell("both");
      both.model.use_vis = both.model.use_imu = true;
      cells = {imu, vis, both};
      break;
    }
    case Sweep::kLatentDim:
      for (std::size_t size : opts.latent_sample_sizes) {
        for (std::size_t d : opts.latent_dims) {
          Cell c = cell("n=" + std::to_string(size) + ",d=" + std::to_string(d));
          c.model.latent_dim = d;
          c.train_sequences = size;
          cells.push_back(c);
        }
      }
      break;
    case Sweep::kVariants:
      for (Variant v : {Variant::kFull, Variant::kStochasticOnlyS, Variant::kStochasticOnlyD,
                        Variant::kDeterministicBaseline}) {
        Cell c = cell(to_string(v));
        c.model.variant = v;
        cells.push_back(c);
      }
      break;
  }
  return cells;
}

std::vector<CellResult> run_sweep(Sweep sweep, const Experiment& base,
                                  const AblationOptions& opts, const CellCallback& on_cell) {
  const auto cells = sweep_cells(sweep, base, opts);
  std::size_t max_train = 0;
  for (const auto& c : cells) max_train = std::max(max_train, c.train_sequences);
  std::vector<CellResult> results;
  for (std::uint64_t seed : opts.seeds) {
    const WorldConfig world = world_for_seed(base.world, seed);
    const auto train_all = train_split(world, max_train);
    const auto test = test_split(world, base.data);
    for (const auto& c : cells) {
      TrainConfig tc = base.train;
      tc.seed = base.train.seed + seed;
      const std::span<const SequenceDataset> train_data(train_all.data(), c.train_sequences);
      const TrainResult tr = train(train_data, c.model, tc);
      CellResult r;
      r.sweep = to_string(sweep);
      r.label = c.label;
      r.seed = seed;
      r.train_sequences = c.train_sequences;
      r.model = c.model;
      r.report = evaluate(tr.params, c.model, test, base.eval_clip_len);
      if (on_cell) on_cell(r);
      results.push_back(std::move(r));
    }
  }
  return results;
}

void write_sweep_csv(std::ostream& out, std::span<const CellResult> results) {
  out << std::setprecision(17);
  out << "sweep,label,seed,train_sequences,variant,gamma,latent_dim,sensors,t_rmse,r_rmse,"
         "sigma2\n";
  for (const auto& r : results) {
    std::string sensors = r.model.use_vis && r.model.use_imu ? "vis+imu"
                          : r.model.use_vis                   ? "vis"
                                                              : "imu";
    out << r.sweep << ',' << r.label << ',' << r.seed << ',' << r.train_sequences << ','
        << to_string(r.model.variant) << ',' << r.model.gamma << ',' << r.model.latent_dim << ','
        << sensors << ',' << r.report.t_rmse << ',' << r.report.r_rmse << ',' << r.report.sigma2
        << '\n';
  }
}

std::size_t scale_dim(std::size_t base, double factor) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(base) * factor));
}

double nlogn_ratio(double n0, double n1) {
  if (n0 <= 1 || n1 <= 1) throw std::invalid_argument("nlogn_ratio: n must exceed 1");
  return (n1 / std::log(n1)) / (n0 / std::log(n0));
}

}  // namespace ibvo
