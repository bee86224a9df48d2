// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0
//
// ibvo: dataset generation, training, evaluation, ablations, probes and
// information-theory checks.
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure or failed check.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ibvo/checkpoint.hpp"
#include "ibvo/config.hpp"
#include "ibvo/dataset_io.hpp"
#include "ibvo/evaluator.hpp"
#include "ibvo/info.hpp"
#include "ibvo/rng.hpp"
#include "ibvo/trainer.hpp"

namespace fs = std::filesystem;
using namespace ibvo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void write_json(const fs::path& path, const Json& j) { open_out(path) << j.dump(2) << '\n'; }

// A gen output holds train/ and test/; a plain dataset directory is used as is.
fs::path split_dir(const fs::path& dir, const char* split) {
  const fs::path sub = dir / split;
  return fs::exists(sub / "manifest.json") ? sub : dir;
}

Json eval_json(const EvalReport& r) {
  Json seqs = Json::array();
  for (const auto& s : r.sequences) {
    seqs.push_back({{"index", s.index}, {"t_rmse", s.t_rmse}, {"r_rmse", s.r_rmse}, {"sigma2", s.sigma2}});
  }
  return Json{{"L", r.L},
              {"pairs", r.pairs},
              {"t_rmse", r.t_rmse},
              {"r_rmse_deg", r.r_rmse},
              {"sigma2", r.sigma2},
              {"sigma2_p", r.sigma2_p},
              {"pos_t_rmse", r.pos_t_rmse},
              {"pos_r_rmse_deg", r.pos_r_rmse},
              {"pos_sigma2", r.pos_sigma2},
              {"pos_count", r.pos_count},
              {"sequences", seqs}};
}

Json bins_json(const std::vector<UncertaintyBin>& bins) {
  Json a = Json::array();
  for (const auto& b : bins) a.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"sigma2", b.sigma2}});
  return a;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string config, out;
  std::uint64_t seed = 0;
};

int cmd_gen(const GenArgs& a) {
  const RunConfig rc = load_run_config(a.config);
  const WorldConfig world = world_for_seed(rc.world, a.seed);
  const auto train = train_split(world, rc.data.train_sequences);
  const auto test = test_split(world, rc.data);
  WorldConfig test_world = world;
  test_world.nuisance_shift = rc.data.test_nuisance_shift;
  save_datasets(train, fs::path(a.out) / "train", world);
  save_datasets(test, fs::path(a.out) / "test", test_world);
  std::cout << "wrote " << train.size() << " train and " << test.size() << " test sequences to "
            << a.out << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string config, data, out;
  std::uint64_t seed = 0;
  bool resume = false;
};

int cmd_train(const TrainArgs& a) {
  const RunConfig rc = load_run_config(a.config);
  const Experiment ex = rc.experiment();
  const auto datasets = load_datasets(split_dir(a.data, "train"));
  if (datasets.empty()) throw std::invalid_argument("--data: no sequences in " + a.data);
  const ModelConfig model = with_data_shape(ex.model, datasets.front());
  TrainConfig train = ex.train;
  train.seed += a.seed;

  const fs::path out(a.out);
  fs::create_directories(out);
  const fs::path ckpt = out / "checkpoint.json";
  TrainState state;
  if (a.resume && fs::exists(ckpt)) {
    Checkpoint c = resume(ckpt, model);
    state = std::move(c.state);
    std::cout << "resuming at epoch " << state.epoch << '\n';
  } else {
    state = init_train_state(model, train);
  }
  TrainHooks hooks;
  hooks.checkpoint = ckpt;
  hooks.on_epoch = [&](const EpochMetrics& m) {
    std::cout << "epoch " << m.epoch << " loss " << m.loss << " pose " << m.pose_term << " kl "
              << m.kl_term << " lr " << m.lr << '\n';
  };
  train_epochs(state, datasets, model, train, train.epochs, hooks);
  if (state.epoch == train.epochs && !fs::exists(ckpt)) save_checkpoint(ckpt, model, train, state);
  write_metrics_csv(out / "metrics.csv", state.log);
  return kExitOk;
}

struct EvalArgs {
  std::string ckpt, data, out, degrade, target = "both";
  std::size_t clip_len = 0;
  std::uint64_t seed = 0;
};

int cmd_eval(const EvalArgs& a) {
  if (!a.degrade.empty()) {
    degrade_kind_from_string(a.degrade);
    degrade_target_from_string(a.target);
  }
  const Checkpoint c = load_checkpoint(a.ckpt);
  auto datasets = load_datasets(split_dir(a.data, "test"));
  if (datasets.empty()) throw std::invalid_argument("--data: no sequences in " + a.data);
  if (!a.degrade.empty()) {
    for (auto& ds : datasets) ds = degrade(ds, a.degrade, a.target, a.seed);
  }
  const std::size_t L = a.clip_len ? a.clip_len : c.train.clip_len;
  const EvalReport r = evaluate(c.state.params, c.model, datasets, L);
  const UncertaintyReport u = uncertainty(c.state.params, c.model, datasets, L);

  const fs::path out(a.out);
  {
    auto f = open_out(out / "eval.csv");
    f << std::setprecision(17);
    write_eval_csv(f, r);
  }
  Json j = eval_json(r);
  j["degrade"] = a.degrade.empty() ? "clean" : a.degrade + "-" + a.target;
  j["uncertainty"] = {{"sigma2", u.sigma2},
                      {"by_turn", bins_json(u.by_turn)},
                      {"by_forward", bins_json(u.by_forward)}};
  write_json(out / "eval.json", j);
  std::cout << "t_rmse " << r.t_rmse << " m, r_rmse " << r.r_rmse << " deg, sigma2 " << r.sigma2
            << '\n';
  return kExitOk;
}

struct AblateArgs {
  std::string sweep, config, out;
  std::uint64_t seed = 0;
};

int cmd_ablate(const AblateArgs& a) {
  const Sweep sweep = sweep_from_string(a.sweep);
  const RunConfig rc = load_run_config(a.config);
  Experiment ex = rc.experiment();
  ex.world = world_for_seed(ex.world, a.seed);
  ex.train.seed += a.seed;
  const fs::path out = !a.out.empty() ? fs::path(a.out)
                       : !rc.output_dir.empty() ? fs::path(rc.output_dir)
                                                : fs::path(".");
  const auto results = run_sweep(sweep, ex, rc.ablation, [](const CellResult& r) {
    std::cout << r.label << " seed " << r.seed << " t_rmse " << r.report.t_rmse << " r_rmse "
              << r.report.r_rmse << '\n';
  });
  auto f = open_out(out / ("sweep_" + to_string(sweep) + ".csv"));
  f << std::setprecision(17);
  write_sweep_csv(f, results);
  return kExitOk;
}

struct ProbeArgs {
  std::string ckpt, baseline, data, out = ".", config;
  std::uint64_t seed = 0;
};

int cmd_probe(const ProbeArgs& a) {
  ProbeConfig pc;
  if (!a.config.empty()) pc = load_run_config(a.config).probe;
  pc.seed += a.seed;
  const Checkpoint ib = load_checkpoint(a.ckpt);
  const Checkpoint base = load_checkpoint(a.baseline);
  auto train = load_datasets(split_dir(a.data, "train"));
  auto test = load_datasets(split_dir(a.data, "test"));
  if (split_dir(a.data, "train") == split_dir(a.data, "test")) {
    // One directory: hold out the last third.
    const std::size_t cut = train.size() - train.size() / 3;
    if (cut == 0 || cut == train.size()) {
      throw std::invalid_argument("--data: need at least two sequences to split for the probe");
    }
    test.assign(train.begin() + static_cast<std::ptrdiff_t>(cut), train.end());
    train.resize(cut);
  }
  const auto rows = nuisance_probe({&base.state.params, &base.model},
                                   {&ib.state.params, &ib.model}, train, test, pc);
  auto f = open_out(fs::path(a.out) / "probe.csv");
  f << std::setprecision(17);
  write_probe_csv(f, rows);
  for (const auto& r : rows) {
    std::cout << "hidden " << r.hidden << " baseline " << r.mse_baseline << " ib " << r.mse_ib
              << " noise " << r.mse_noise << '\n';
  }
  return kExitOk;
}

struct VerifyArgs {
  std::string claim, out;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::size_t max_card = 0;
  bool wall_clock = false;
  BoundContext ctx;
};

Json verify_bounds(const BoundContext& ctx, std::size_t& violations) {
  ctx.validate();
  Json checks = Json::array();
  auto check = [&](const std::string& name, bool ok) {
    checks.push_back({{"check", name}, {"ok", ok}});
    if (!ok) ++violations;
  };
  BoundContext c = ctx;
  check("theorem1 is zero at I=0", bound_value_theorem1(ctx, 0.0) == 0.0);
  double prev = INFINITY;
  bool mono = true;
  for (double L : {1.0, 10.0, 100.0}) {
    c.L = L;
    const double v = bound_value_theorem1(c, 1.0);
    mono = mono && v < prev;
    prev = v;
  }
  check("theorem1 decreases in L", mono);
  c = ctx;
  prev = -INFINITY;
  mono = true;
  for (double d = 2; d <= 64; d *= 2) {
    c.d = d;
    const double v = bound_value_corollary2(c);
    mono = mono && v > prev;
    prev = v;
  }
  check("corollary2 increases in d", mono);
  c = ctx;
  prev = INFINITY;
  mono = true;
  for (double n = 100; n <= 1e6; n *= 10) {
    c.n = n;
    const double v = bound_value_corollary2(c);
    mono = mono && v < prev;
    prev = v;
  }
  check("corollary2 decreases in n", mono);
  return Json{{"context",
               {{"L", ctx.L}, {"eta", ctx.eta}, {"sigma", ctx.sigma}, {"n", ctx.n}, {"d", ctx.d},
                {"M", ctx.M}, {"S_card", ctx.S_card}}},
              {"theorem1_at_I1", bound_value_theorem1(ctx, 1.0)},
              {"corollary1", bound_value_corollary1(ctx)},
              {"corollary2", bound_value_corollary2(ctx)},
              {"checks", checks}};
}

Json verify_kalman(std::size_t trials, std::uint64_t seed, std::size_t& violations) {
  Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  const double scalar = linear_gaussian_bottleneck_mi(one, one, one);
  const double closed = 0.5 * std::log(2.0);
  if (std::abs(scalar - closed) > 1e-9) ++violations;
  if (linear_gaussian_bottleneck_mi(one, one, Eigen::MatrixXd::Zero(1, 1)) != 0.0) ++violations;
  // Scaling R by c > 1 must raise the value.
  std::size_t monotone_failures = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(Rng::derive(seed, {purpose(StreamPurpose::kChain), t}));
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(4));
    Eigen::MatrixXd A(n, n), B(n, n), C(n, n);
    for (Eigen::Index i = 0; i < n * n; ++i) {
      A.data()[i] = rng.normal();
      B.data()[i] = rng.normal();
      C.data()[i] = rng.normal();
    }
    A += 2.0 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd S = B * B.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd R = C * C.transpose() + 0.01 * Eigen::MatrixXd::Identity(n, n);
    const double c = 1.0 + 4.0 * rng.uniform() + 1e-3;
    if (!(linear_gaussian_bottleneck_mi(A, S, c * R) > linear_gaussian_bottleneck_mi(A, S, R))) {
      ++monotone_failures;
    }
  }
  violations += monotone_failures;
  return Json{{"scalar_value", scalar},
              {"closed_form", closed},
              {"trials", trials},
              {"monotone_failures", monotone_failures}};
}

int cmd_verify(const VerifyArgs& a) {
  Json j;
  std::size_t violations = 0;
  if (a.claim == "lemma1" || a.claim == "theorem2") {
    if (a.trials == 0) throw std::invalid_argument("--trials: must be >= 1");
    const VerifyReport r =
        a.claim == "lemma1"
            ? verify_lemma1_dpi(a.trials, a.seed, a.max_card ? a.max_card : 4, a.wall_clock)
            : verify_theorem2(a.trials, a.seed, a.max_card ? a.max_card : 3, a.wall_clock);
    j = r.to_json();
    violations = r.violations;
  } else if (a.claim == "bounds") {
    j = verify_bounds(a.ctx, violations);
    j["claim"] = "bounds";
    j["violations"] = violations;
  } else if (a.claim == "kalman") {
    j = verify_kalman(a.trials, a.seed, violations);
    j["claim"] = "kalman";
    j["violations"] = violations;
  } else {
    throw std::invalid_argument("--claim: unknown claim '" + a.claim +
                                "' (expected lemma1, theorem2, bounds or kalman)");
  }
  j["seed"] = a.seed;
  if (a.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json(a.out, j);
  }
  return violations == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ibvo: information-bottleneck odometry on a synthetic world"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate train and test datasets");
  g->add_option("--config", gen.config, "Run config (JSON)")->required();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--seed", gen.seed, "Repeat seed, offsets the world seeds");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model");
  t->add_option("--config", tr.config, "Run config (JSON)")->required();
  t->add_option("--data", tr.data, "Dataset directory")->required();
  t->add_option("--out", tr.out, "Output directory")->required();
  t->add_option("--seed", tr.seed, "Offsets train.seed");
  t->add_flag("--resume", tr.resume, "Continue from OUT/checkpoint.json when present");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint");
  e->add_option("--ckpt", ev.ckpt, "Checkpoint index file")->required();
  e->add_option("--data", ev.data, "Dataset directory")->required();
  e->add_option("--out", ev.out, "Output directory")->required();
  e->add_option("--degrade", ev.degrade, "noisy or missing");
  e->add_option("--target", ev.target, "vis, imu or both");
  e->add_option("--clip-len", ev.clip_len, "Evaluation clip length (default: training clip length)");
  e->add_option("--seed", ev.seed, "Degradation seed");

  AblateArgs ab;
  auto* b = app.add_subcommand("ablate", "Run an ablation sweep");
  b->add_option("--sweep", ab.sweep, "gamma, samples, sensors, latent-dim or variants")->required();
  b->add_option("--config", ab.config, "Run config (JSON)")->required();
  b->add_option("--out", ab.out, "Output directory (default: output_dir of the config)");
  b->add_option("--seed", ab.seed, "Offsets world and training seeds");

  ProbeArgs pr;
  auto* p = app.add_subcommand("probe", "Probe latents for the nuisance code");
  p->add_option("--ckpt", pr.ckpt, "Checkpoint with gamma > 0")->required();
  p->add_option("--baseline-ckpt", pr.baseline, "Checkpoint with gamma = 0")->required();
  p->add_option("--data", pr.data, "Dataset directory")->required();
  p->add_option("--out", pr.out, "Output directory");
  p->add_option("--config", pr.config, "Run config supplying probe options");
  p->add_option("--seed", pr.seed, "Offsets probe.seed");

  VerifyArgs vf;
  auto* v = app.add_subcommand("verify", "Check information-theory claims exactly");
  v->add_option("--claim", vf.claim, "lemma1, theorem2, bounds or kalman")->required();
  v->add_option("--trials", vf.trials, "Random instances");
  v->add_option("--seed", vf.seed, "Seed");
  v->add_option("--max-alphabet", vf.max_card, "Largest alphabet (lemma1: 4, theorem2: 3)");
  v->add_option("--out", vf.out, "Write the report here instead of stdout");
  v->add_flag("--wall-clock", vf.wall_clock, "Record runtime_seconds");
  v->add_option("--L", vf.ctx.L, "Effective layers");
  v->add_option("--eta", vf.ctx.eta, "Per-layer contraction in (0, 1)");
  v->add_option("--sigma", vf.ctx.sigma, "Sub-Gaussian parameter");
  v->add_option("--n", vf.ctx.n, "Sample size");
  v->add_option("--d", vf.ctx.d, "Latent dimension");
  v->add_option("--M", vf.ctx.M, "Coordinate bound");
  v->add_option("--S-card", vf.ctx.S_card, "Latent-space cardinality");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kExitInvalid;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*t) return cmd_train(tr);
    if (*e) return cmd_eval(ev);
    if (*b) return cmd_ablate(ab);
    if (*p) return cmd_probe(pr);
    if (*v) return cmd_verify(vf);
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitInvalid;
  } catch (const DatasetFormatError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitInvalid;
  } catch (const CheckpointError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
