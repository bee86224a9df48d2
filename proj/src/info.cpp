// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ibvo/info.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ibvo/rng.hpp"

namespace ibvo {

DiscreteJoint::DiscreteJoint(std::vector<std::string> names, std::vector<std::size_t> cards,
                             std::vector<double> p)
    : names_(std::move(names)), cards_(std::move(cards)), p_(std::move(p)) {
  if (names_.size() != cards_.size()) {
    throw std::invalid_argument("DiscreteJoint: " + std::to_string(names_.size()) + " names for " +
                                std::to_string(cards_.size()) + " alphabets");
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (cards_[i] == 0 || cards_[i] > kMaxAlphabet) {
      throw std::invalid_argument("DiscreteJoint: alphabet of '" + names_[i] + "' has size " +
                                  std::to_string(cards_[i]) + ", expected 1.." +
                                  std::to_string(kMaxAlphabet));
    }
    if (std::count(names_.begin(), names_.end(), names_[i]) != 1) {
      throw std::invalid_argument("DiscreteJoint: duplicate variable '" + names_[i] + "'");
    }
    total *= cards_[i];
  }
  if (p_.size() != total) {
    throw std::invalid_argument("DiscreteJoint: table holds " + std::to_string(p_.size()) +
                                " entries, alphabets need " + std::to_string(total));
  }
  double sum = 0.0;
  for (double x : p_) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument("DiscreteJoint: negative or non-finite probability");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("DiscreteJoint: table sums to " + std::to_string(sum));
  }
}

std::size_t DiscreteJoint::index_of(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::invalid_argument("unknown variable '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

std::vector<double> DiscreteJoint::marginal(std::span<const std::string> vars) const {
  std::vector<std::size_t> idx;
  std::size_t out_size = 1;
  for (const auto& v : vars) {
    idx.push_back(index_of(v));
    out_size *= cards_[idx.back()];
  }
  std::vector<double> out(out_size, 0.0);
  std::vector<std::size_t> coord(names_.size(), 0);
  for (double x : p_) {
    std::size_t o = 0;
    for (std::size_t i : idx) o = o * cards_[i] + coord[i];
    out[o] += x;
    for (std::size_t k = names_.size(); k-- > 0;) {
      if (++coord[k] < cards_[k]) break;
      coord[k] = 0;
    }
  }
  return out;
}

Json DiscreteJoint::to_json() const { return Json{{"names", names_}, {"cards", cards_}, {"p", p_}}; }

DiscreteJoint DiscreteJoint::from_json(const Json& j) {
  return DiscreteJoint(j.at("names").get<std::vector<std::string>>(),
                       j.at("cards").get<std::vector<std::size_t>>(),
                       j.at("p").get<std::vector<double>>());
}

namespace {

VarSet union_of(std::initializer_list<const VarSet*> sets) {
  VarSet out;
  for (const VarSet* s : sets) {
    for (const auto& v : *s) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  }
  return out;
}

}  // namespace

double entropy(const DiscreteJoint& joint, const VarSet& vars) {
  double h = 0.0;
  for (double p : joint.marginal(vars)) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double mutual_info(const DiscreteJoint& joint, const VarSet& a, const VarSet& b) {
  return entropy(joint, a) + entropy(joint, b) - entropy(joint, union_of({&a, &b}));
}

double cond_mutual_info(const DiscreteJoint& joint, const VarSet& a, const VarSet& b,
                        const VarSet& c) {
  return entropy(joint, union_of({&a, &c})) + entropy(joint, union_of({&b, &c})) -
         entropy(joint, union_of({&a, &b, &c})) - entropy(joint, c);
}

namespace {

std::vector<double> dirichlet1(Rng& rng, std::size_t k) {
  std::vector<double> w(k);
  double sum = 0.0;
  for (auto& x : w) {
    x = -std::log(1.0 - rng.uniform());
    sum += x;
  }
  for (auto& x : w) x /= sum;
  return w;
}

}  // namespace

DiscreteJoint sample_markov_chain(const ChainSpec& spec, std::uint64_t seed) {
  if (spec.source_cards.empty() || spec.source_cards.size() > 2) {
    throw std::invalid_argument("sample_markov_chain: expected one or two sources");
  }
  Rng rng(seed);
  std::size_t nx = 1;
  for (std::size_t c : spec.source_cards) nx *= c;
  const std::size_t ns = spec.s_card, nxi = spec.xi_card;

  const auto px = dirichlet1(rng, nx);
  std::vector<std::vector<double>> ps_x(nx), pxi_s(ns);
  for (auto& row : ps_x) row = dirichlet1(rng, ns);
  for (auto& row : pxi_s) row = dirichlet1(rng, nxi);

  std::vector<double> p;
  p.reserve(nx * ns * nxi);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t e = 0; e < nxi; ++e) p.push_back(px[x] * ps_x[x][s] * pxi_s[s][e]);
    }
  }
  double sum = 0.0;
  for (double x : p) sum += x;
  for (double& x : p) x /= sum;

  std::vector<std::string> names;
  std::vector<std::size_t> cards = spec.source_cards;
  if (spec.source_cards.size() == 1) {
    names = {"X"};
  } else {
    names = {"o1", "o2"};
  }
  names.insert(names.end(), {"S", "xi"});
  cards.insert(cards.end(), {ns, nxi});
  return DiscreteJoint(std::move(names), std::move(cards), std::move(p));
}

Json VerifyReport::to_json() const {
  Json v = Json::array();
  for (const auto& x : violating) v.push_back(Json{{"trial", x.trial}, {"slack", x.slack}, {"joint", x.joint}});
  return Json{{"claim", claim},
              {"trials", trials},
              {"violations", violations},
              {"min_slack", min_slack},
              {"mean_slack", mean_slack},
              {"runtime_seconds", runtime_seconds},
              {"violating", v}};
}

namespace {

template <class Slack>
VerifyReport run_trials(const std::string& claim, std::size_t trials, std::uint64_t seed,
                        std::size_t sources, std::size_t max_card, bool record_runtime,
                        Slack slack_of) {
  if (trials == 0) throw std::invalid_argument("verify: trials must be >= 1");
  if (max_card < 2 || max_card > kMaxAlphabet) {
    throw std::invalid_argument("verify: max alphabet must be in [2, " +
                                std::to_string(kMaxAlphabet) + "]");
  }
  const auto t0 = std::chrono::steady_clock::now();
  VerifyReport r;
  r.claim = claim;
  r.trials = trials;
  r.min_slack = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t key = Rng::derive(seed, {purpose(StreamPurpose::kChain), t});
    Rng sizes(Rng::derive(key, {0}));
    ChainSpec spec;
    spec.source_cards.assign(sources, 0);
    for (auto& c : spec.source_cards) c = 2 + sizes.below(max_card - 1);
    spec.s_card = 2 + sizes.below(max_card - 1);
    spec.xi_card = 2 + sizes.below(max_card - 1);
    const DiscreteJoint j = sample_markov_chain(spec, Rng::derive(key, {1}));
    const double s = slack_of(j);
    sum += s;
    r.min_slack = std::min(r.min_slack, s);
    if (s < -kVerifyTolerance) {
      ++r.violations;
      r.violating.push_back({t, s, j.to_json()});
    }
  }
  r.mean_slack = sum / static_cast<double>(trials);
  if (record_runtime) {
    r.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return r;
}

}  // namespace

VerifyReport verify_lemma1_dpi(std::size_t trials, std::uint64_t seed, std::size_t max_card,
                               bool record_runtime) {
  return run_trials("lemma1", trials, seed, 1, max_card, record_runtime,
                    [](const DiscreteJoint& j) {
                      return mutual_info(j, {"X"}, {"S"}) - mutual_info(j, {"X"}, {"xi"});
                    });
}

VerifyReport verify_theorem2(std::size_t trials, std::uint64_t seed, std::size_t max_card,
                             bool record_runtime) {
  return run_trials("theorem2", trials, seed, 2, max_card, record_runtime,
                    [](const DiscreteJoint& j) {
                      const double lhs = mutual_info(j, {"xi"}, {"S"});
                      const double i_old = mutual_info(j, {"xi"}, {"o1"});
                      const double i_new = cond_mutual_info(j, {"xi"}, {"o2"}, {"o1"});
                      const double i_obs = cond_mutual_info(j, {"o1"}, {"o2"}, {"xi"});
                      return lhs - (i_old + i_new - i_obs);
                    });
}

void BoundContext::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("bound context: ") + name + " must be positive");
    }
  };
  positive(L, "L");
  positive(eta, "eta");
  positive(sigma, "sigma");
  positive(n, "n");
  positive(d, "d");
  positive(M, "M");
  positive(S_card, "S_card");
  if (eta >= 1.0) throw std::invalid_argument("bound context: eta must be < 1");
}

double bound_prefactor(const BoundContext& ctx) {
  ctx.validate();
  return std::exp(-(ctx.L / 2.0) * std::log(1.0 / ctx.eta));
}

double bound_value_theorem1(const BoundContext& ctx, double I_xs) {
  if (!(I_xs >= 0.0)) throw std::invalid_argument("bound: I(X;S) must be >= 0");
  return bound_prefactor(ctx) * std::sqrt(2.0 * ctx.sigma * ctx.sigma * I_xs / ctx.n);
}

double bound_value_corollary1(const BoundContext& ctx) {
  return bound_prefactor(ctx) *
         std::sqrt(2.0 * ctx.sigma * ctx.sigma / ctx.n * std::log(ctx.S_card));
}

double bound_value_corollary2(const BoundContext& ctx) {
  const double n = ctx.n, d = ctx.d;
  const double inner =
      d * std::log(d) / n + 2.0 * std::log(2.0 * ctx.M) * d / n + d / (n / std::log(n));
  return bound_prefactor(ctx) * ctx.sigma * std::sqrt(inner);
}

double linear_gaussian_bottleneck_mi(const Eigen::MatrixXd& A, const Eigen::MatrixXd& sigma_prev,
                                     const Eigen::MatrixXd& R) {
  if (A.cols() != sigma_prev.rows() || sigma_prev.rows() != sigma_prev.cols() ||
      R.rows() != A.rows() || R.cols() != A.rows()) {
    throw std::invalid_argument("linear_gaussian_bottleneck_mi: shape mismatch");
  }
  const Eigen::MatrixXd P = A * sigma_prev * A.transpose();
  const Eigen::LDLT<Eigen::MatrixXd> base(P);
  const Eigen::LDLT<Eigen::MatrixXd> noisy(P + R);
  auto logdet = [](const Eigen::LDLT<Eigen::MatrixXd>& f) {
    double s = 0.0;
    const auto d = f.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (!(d(i) > 0.0)) return -std::numeric_limits<double>::infinity();
      s += std::log(d(i));
    }
    return s;
  };
  const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
  const double lp = logdet(base);
  if (!std::isfinite(lp) || base.vectorD().minCoeff() <= 1e-14 * scale) {
    throw std::invalid_argument(
        "linear_gaussian_bottleneck_mi: A Sigma A' is singular, the information is undefined");
  }
  const double ln = logdet(noisy);
  if (!std::isfinite(ln)) {
    throw std::invalid_argument("linear_gaussian_bottleneck_mi: R is not positive semidefinite");
  }
  return 0.5 * (ln - lp);
}

}  // namespace ibvo
