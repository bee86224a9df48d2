// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

// Exact information quantities on small discrete joints, plus closed-form
// generalization bounds and the linear-Gaussian bottleneck term. Everything is
// in nats.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ibvo/json_util.hpp"

namespace ibvo {

inline constexpr std::size_t kMaxAlphabet = 8;

/// Probability table over the product of named finite alphabets. The first
/// variable varies slowest.
class DiscreteJoint {
 public:
  DiscreteJoint(std::vector<std::string> names, std::vector<std::size_t> cards,
                std::vector<double> p);

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::size_t>& cards() const { return cards_; }
  const std::vector<double>& table() const { return p_; }

  /// Throws std::invalid_argument naming the variable when it is absent.
  std::size_t index_of(const std::string& name) const;

  /// Marginal over `vars`, laid out with vars[0] slowest.
  std::vector<double> marginal(std::span<const std::string> vars) const;

  Json to_json() const;
  static DiscreteJoint from_json(const Json& j);

 private:
  std::vector<std::string> names_;
  std::vector<std::size_t> cards_;
  std::vector<double> p_;
};

using VarSet = std::vector<std::string>;

double entropy(const DiscreteJoint& joint, const VarSet& vars);
double mutual_info(const DiscreteJoint& joint, const VarSet& a, const VarSet& b);
double cond_mutual_info(const DiscreteJoint& joint, const VarSet& a, const VarSet& b,
                        const VarSet& c);

/// Sources feed S, which feeds xi. One source is named "X"; two are "o1" and
/// "o2". Conditionals are Dirichlet(1) draws.
struct ChainSpec {
  std::vector<std::size_t> source_cards{2};
  std::size_t s_card = 2;
  std::size_t xi_card = 2;
};

DiscreteJoint sample_markov_chain(const ChainSpec& spec, std::uint64_t seed);

struct Violation {
  std::size_t trial = 0;
  double slack = 0.0;
  Json joint;
};

struct VerifyReport {
  std::string claim;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double min_slack = 0.0;
  double mean_slack = 0.0;
  double runtime_seconds = 0.0;
  std::vector<Violation> violating;

  bool ok() const { return violations == 0; }
  Json to_json() const;
};

inline constexpr double kVerifyTolerance = 1e-9;

/// Random chains X -> S -> xi with alphabets in [2, max_card]; checks
/// I(X;S) >= I(X;xi).
VerifyReport verify_lemma1_dpi(std::size_t trials, std::uint64_t seed, std::size_t max_card = 4,
                               bool record_runtime = false);

/// Random chains (o1, o2) -> S -> xi; checks
/// I(xi;S) >= I(xi;o1) + I(xi;o2|o1) - I(o1;o2|xi).
VerifyReport verify_theorem2(std::size_t trials, std::uint64_t seed, std::size_t max_card = 3,
                             bool record_runtime = false);

/// L, eta and sigma are modelling assumptions with no measurement procedure.
struct BoundContext {
  double L = 1.0;
  double eta = 0.5;
  double sigma = 1.0;
  double n = 1000.0;
  double d = 4.0;
  double M = 1.0;
  double S_card = 2.0;

  void validate() const;
};

double bound_prefactor(const BoundContext& ctx);
double bound_value_theorem1(const BoundContext& ctx, double I_xs);
double bound_value_corollary1(const BoundContext& ctx);
double bound_value_corollary2(const BoundContext& ctx);

/// 0.5 ln(|A S A' + R| / |A S A'|).
double linear_gaussian_bottleneck_mi(const Eigen::MatrixXd& A, const Eigen::MatrixXd& sigma_prev,
                                     const Eigen::MatrixXd& R);

}  // namespace ibvo
