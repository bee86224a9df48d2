// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "ibvo/info.hpp"
#include "oracles.hpp"

namespace ibvo {
namespace {

const double kLn2 = std::log(2.0);

// Builds a table by evaluating `p` at every coordinate, first variable slowest.
DiscreteJoint build(std::vector<std::string> names, std::vector<std::size_t> cards,
                    const std::function<double(const std::vector<std::size_t>&)>& p) {
  std::size_t total = 1;
  for (auto c : cards) total *= c;
  std::vector<double> table;
  std::vector<std::size_t> coord(cards.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    table.push_back(p(coord));
    for (std::size_t i = cards.size(); i-- > 0;) {
      if (++coord[i] < cards[i]) break;
      coord[i] = 0;
    }
  }
  return DiscreteJoint(std::move(names), std::move(cards), std::move(table));
}

DiscreteJoint random_joint(std::mt19937_64& gen, std::size_t vars, std::size_t max_card) {
  std::uniform_int_distribution<std::size_t> card(2, max_card);
  std::exponential_distribution<double> e(1.0);
  std::vector<std::string> names;
  std::vector<std::size_t> cards;
  std::size_t total = 1;
  for (std::size_t i = 0; i < vars; ++i) {
    names.push_back("v" + std::to_string(i));
    cards.push_back(card(gen));
    total *= cards.back();
  }
  std::vector<double> p(total);
  double s = 0;
  for (auto& x : p) s += (x = e(gen));
  for (auto& x : p) x /= s;
  return DiscreteJoint(names, cards, p);
}

TEST(Joint, ValidationErrors) {
  EXPECT_THROW(DiscreteJoint({"a"}, {2}, {0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(DiscreteJoint({"a"}, {2}, {1.5, -0.5}), std::invalid_argument);
  EXPECT_THROW(DiscreteJoint({"a"}, {9}, std::vector<double>(9, 1.0 / 9)), std::invalid_argument);
  EXPECT_THROW(DiscreteJoint({"a", "a"}, {1, 2}, {0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(DiscreteJoint({"a"}, {3}, {0.5, 0.5}), std::invalid_argument);
  EXPECT_NO_THROW(DiscreteJoint({"a"}, {2}, {0.5, 0.5}));
}

TEST(Joint, JsonRoundTrip) {
  const DiscreteJoint j = sample_markov_chain({}, 3);
  const DiscreteJoint back = DiscreteJoint::from_json(j.to_json());
  EXPECT_EQ(back.names(), j.names());
  EXPECT_EQ(back.cards(), j.cards());
  EXPECT_EQ(back.table(), j.table());
}

TEST(Mi, IndependentUniformBitsShareNothing) {
  const DiscreteJoint j({"a", "b"}, {2, 2}, {0.25, 0.25, 0.25, 0.25});
  EXPECT_NEAR(mutual_info(j, {"a"}, {"b"}), 0.0, 1e-15);
  EXPECT_NEAR(entropy(j, {"a", "b"}), 2 * kLn2, 1e-15);
}

TEST(Mi, CopiedBitSharesLn2) {
  const DiscreteJoint j({"a", "b"}, {2, 2}, {0.5, 0.0, 0.0, 0.5});
  EXPECT_NEAR(mutual_info(j, {"a"}, {"b"}), kLn2, 1e-15);
}

TEST(Mi, SmallTableMatchesDirectSummation) {
  const DiscreteJoint j({"a", "b"}, {2, 2}, {0.4, 0.1, 0.1, 0.4});
  const double want = oracle::table_mi({{0.4, 0.1}, {0.1, 0.4}});
  EXPECT_NEAR(want, 0.1927, 1e-4);
  EXPECT_NEAR(mutual_info(j, {"a"}, {"b"}), want, 1e-14);
}

TEST(Mi, RandomTablesMatchDirectSummation) {
  std::mt19937_64 gen(1);
  for (int k = 0; k < 50; ++k) {
    const DiscreteJoint j = random_joint(gen, 2, 6);
    std::vector<std::vector<double>> t(j.cards()[0], std::vector<double>(j.cards()[1]));
    for (std::size_t a = 0; a < j.cards()[0]; ++a) {
      for (std::size_t b = 0; b < j.cards()[1]; ++b) t[a][b] = j.table()[a * j.cards()[1] + b];
    }
    EXPECT_NEAR(mutual_info(j, {"v0"}, {"v1"}), oracle::table_mi(t), 1e-12);
  }
}

TEST(Mi, UnknownVariableIsNamed) {
  const DiscreteJoint j({"a", "b"}, {2, 2}, {0.25, 0.25, 0.25, 0.25});
  try {
    mutual_info(j, {"a"}, {"z"});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("'z'"), std::string::npos);
  }
}

TEST(Mi, SymmetryChainRuleNonNegativity) {
  std::mt19937_64 gen(2);
  for (int k = 0; k < 300; ++k) {
    const DiscreteJoint j = random_joint(gen, 3, 4);
    const VarSet x{"v0"}, a{"v1"}, b{"v2"};
    EXPECT_NEAR(mutual_info(j, x, a), mutual_info(j, a, x), 1e-12);
    EXPECT_NEAR(mutual_info(j, x, {"v1", "v2"}), mutual_info(j, x, a) + cond_mutual_info(j, x, b, a),
                1e-10);
    EXPECT_GE(entropy(j, {"v0", "v2"}), -1e-12);
    EXPECT_GE(mutual_info(j, a, b), -1e-12);
    EXPECT_GE(cond_mutual_info(j, x, a, b), -1e-12);
  }
}

TEST(Chain, FactorizesThroughS) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ChainSpec spec;
    spec.source_cards = {2 + seed % 3};
    spec.s_card = 2 + (seed / 3) % 3;
    spec.xi_card = 2 + (seed / 9) % 3;
    const DiscreteJoint j = sample_markov_chain(spec, seed);
    EXPECT_LT(std::abs(cond_mutual_info(j, {"X"}, {"xi"}, {"S"})), 1e-10);
  }
  ChainSpec two;
  two.source_cards = {3, 2};
  const DiscreteJoint j = sample_markov_chain(two, 5);
  EXPECT_EQ(j.names(), (std::vector<std::string>{"o1", "o2", "S", "xi"}));
  EXPECT_LT(std::abs(cond_mutual_info(j, {"o1", "o2"}, {"xi"}, {"S"})), 1e-10);
}

TEST(Chain, SameSeedSameTable) {
  EXPECT_EQ(sample_markov_chain({}, 9).table(), sample_markov_chain({}, 9).table());
  EXPECT_NE(sample_markov_chain({}, 9).table(), sample_markov_chain({}, 10).table());
}

TEST(Chain, CopiedLatentKeepsTheSourceEntropy) {
  // X uniform on 3, S = X, xi = S.
  const DiscreteJoint j = build({"X", "S", "xi"}, {3, 3, 3}, [](const auto& c) {
    return c[0] == c[1] && c[1] == c[2] ? 1.0 / 3 : 0.0;
  });
  EXPECT_NEAR(cond_mutual_info(j, {"X"}, {"xi"}, {"S"}), 0.0, 1e-15);
  EXPECT_NEAR(mutual_info(j, {"X"}, {"S"}), entropy(j, {"X"}), 1e-15);
  EXPECT_GE(mutual_info(j, {"X"}, {"S"}), mutual_info(j, {"X"}, {"xi"}) - 1e-15);
}

TEST(Chain, ConstantLatentCarriesNothing) {
  const DiscreteJoint j = build({"X", "S", "xi"}, {2, 2, 2}, [](const auto& c) {
    return c[1] == 0 ? (c[0] == 0 ? 0.3 : 0.7) * (c[2] == 0 ? 0.6 : 0.4) : 0.0;
  });
  EXPECT_NEAR(mutual_info(j, {"X"}, {"S"}), 0.0, 1e-15);
  EXPECT_NEAR(mutual_info(j, {"X"}, {"xi"}), 0.0, 1e-15);
}

// Right-hand side of the sensor-gain inequality.
double sensor_gain_rhs(const DiscreteJoint& j) {
  return mutual_info(j, {"xi"}, {"o1"}) + cond_mutual_info(j, {"xi"}, {"o2"}, {"o1"}) -
         cond_mutual_info(j, {"o1"}, {"o2"}, {"xi"});
}

TEST(SensorGain, ConstantLatentLeavesANonPositiveBound) {
  ChainSpec spec;
  spec.source_cards = {2, 2};
  const DiscreteJoint base = sample_markov_chain(spec, 4);
  // Replace S by a constant: xi becomes independent of the sources.
  const auto po = base.marginal(VarSet{"o1", "o2"});
  const auto pxi = base.marginal(VarSet{"xi"});
  const DiscreteJoint j = build({"o1", "o2", "S", "xi"}, {2, 2, 2, 2}, [&](const auto& c) {
    return c[2] == 0 ? po[c[0] * 2 + c[1]] * pxi[c[3]] : 0.0;
  });
  EXPECT_NEAR(mutual_info(j, {"xi"}, {"S"}), 0.0, 1e-15);
  EXPECT_NEAR(mutual_info(j, {"xi"}, {"o1"}), 0.0, 1e-15);
  EXPECT_LE(sensor_gain_rhs(j), 1e-15);
}

TEST(SensorGain, NewSensorCopyingThePoseIsTight) {
  // o1 independent noise, o2 = xi, S = (o1, o2).
  const DiscreteJoint j = build({"o1", "o2", "S", "xi"}, {2, 2, 4, 2}, [](const auto& c) {
    return (c[1] == c[3] && c[2] == 2 * c[0] + c[1]) ? 0.25 : 0.0;
  });
  EXPECT_NEAR(mutual_info(j, {"xi"}, {"S"}), kLn2, 1e-15);
  EXPECT_NEAR(mutual_info(j, {"xi"}, {"o1"}), 0.0, 1e-15);
  EXPECT_NEAR(cond_mutual_info(j, {"xi"}, {"o2"}, {"o1"}), kLn2, 1e-15);
  EXPECT_NEAR(cond_mutual_info(j, {"o1"}, {"o2"}, {"xi"}), 0.0, 1e-15);
  EXPECT_NEAR(mutual_info(j, {"xi"}, {"S"}) - sensor_gain_rhs(j), 0.0, 1e-15);
}

TEST(Verify, RandomChainsHoldBothClaims) {
  const VerifyReport a = verify_lemma1_dpi(300, 1);
  EXPECT_EQ(a.trials, 300u);
  EXPECT_TRUE(a.ok());
  EXPECT_GE(a.min_slack, -kVerifyTolerance);
  const VerifyReport b = verify_theorem2(300, 1);
  EXPECT_TRUE(b.ok());
  EXPECT_GE(b.mean_slack, b.min_slack);
}

TEST(Verify, ReportsAreReproducible) {
  EXPECT_EQ(verify_theorem2(50, 7).to_json().dump(), verify_theorem2(50, 7).to_json().dump());
  const Json j = verify_lemma1_dpi(10, 2).to_json();
  EXPECT_EQ(j.at("trials"), 10);
  EXPECT_EQ(j.at("violations"), 0);
  EXPECT_TRUE(j.contains("min_slack"));
}

TEST(Bounds, CorollaryTwoAtTheReferenceContext) {
  const BoundContext ctx;
  // exp(-(L/2) ln(1/eta)) sigma sqrt(d ln d / n + 2 ln(2M) d / n + d ln n / n)
  const double n = 1000, d = 4;
  const double want = std::exp(-0.5 * std::log(2.0)) *
                      std::sqrt(d * std::log(d) / n + 2 * std::log(2.0) * d / n + d * std::log(n) / n);
  EXPECT_NEAR(want, 0.1392, 1e-4);
  EXPECT_NEAR(bound_value_corollary2(ctx), want, 1e-12);
}

TEST(Bounds, TheoremOneAndCorollaryOne) {
  BoundContext ctx;
  EXPECT_EQ(bound_value_theorem1(ctx, 0.0), 0.0);
  EXPECT_NEAR(bound_value_theorem1(ctx, 0.5), std::sqrt(0.5) * std::sqrt(2 * 0.5 / 1000), 1e-15);
  EXPECT_NEAR(bound_value_corollary1(ctx), std::sqrt(0.5) * std::sqrt(2.0 / 1000 * kLn2), 1e-15);
  EXPECT_THROW(bound_value_theorem1(ctx, -1.0), std::invalid_argument);
}

TEST(Bounds, Trends) {
  BoundContext ctx;
  double prev = 1e300;
  for (double L : {1.0, 10.0, 100.0}) {
    ctx.L = L;
    const double v = bound_value_theorem1(ctx, 1.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
  ctx = BoundContext{};
  prev = 0;
  for (double d : {2.0, 4.0, 8.0, 16.0, 64.0}) {
    ctx.d = d;
    EXPECT_GT(bound_value_corollary2(ctx), prev);
    prev = bound_value_corollary2(ctx);
  }
  ctx = BoundContext{};
  prev = 1e300;
  for (double n : {100.0, 1000.0, 1e4, 1e5}) {
    ctx.n = n;
    EXPECT_LT(bound_value_corollary2(ctx), prev);
    prev = bound_value_corollary2(ctx);
  }
}

TEST(Bounds, EtaMustBeBelowOne) {
  BoundContext ctx;
  ctx.eta = 1.0;
  EXPECT_THROW(bound_value_corollary2(ctx), std::invalid_argument);
  ctx.eta = 0.5;
  ctx.n = 0;
  EXPECT_THROW(bound_value_corollary1(ctx), std::invalid_argument);
}

Eigen::MatrixXd scalar(double x) { return Eigen::MatrixXd::Constant(1, 1, x); }

TEST(Kalman, NoNoiseAddsNothing) {
  EXPECT_EQ(linear_gaussian_bottleneck_mi(Eigen::MatrixXd::Identity(3, 3),
                                          Eigen::MatrixXd::Identity(3, 3),
                                          Eigen::MatrixXd::Zero(3, 3)),
            0.0);
}

TEST(Kalman, ScalarCaseIsHalfLn2) {
  const double v = linear_gaussian_bottleneck_mi(scalar(1), scalar(1), scalar(1));
  EXPECT_NEAR(v, 0.5 * kLn2, 1e-9);
  const auto mc = oracle::mc_gaussian_channel_mi(1.0, 1.0, 1.0, 1'000'000, 3);
  EXPECT_LT(std::abs(mc.mean - v), 3 * mc.stderr_) << mc.mean << " +- " << mc.stderr_;
}

TEST(Kalman, GrowsWithTheNoise) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n;
  for (int k = 0; k < 50; ++k) {
    Eigen::MatrixXd A(3, 3), B(3, 3), C(3, 3);
    for (int i = 0; i < 9; ++i) A(i) = n(gen), B(i) = n(gen), C(i) = n(gen);
    const Eigen::MatrixXd sigma = B * B.transpose() + 0.1 * Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd R = C * C.transpose();
    const double base = linear_gaussian_bottleneck_mi(A, sigma, R);
    EXPECT_GE(base, 0.0);
    EXPECT_GT(linear_gaussian_bottleneck_mi(A, sigma, 2.5 * R), base);
  }
}

TEST(Kalman, SingularPredictionIsAnError) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
  A(1, 1) = 0;
  EXPECT_THROW(linear_gaussian_bottleneck_mi(A, Eigen::MatrixXd::Identity(2, 2),
                                             Eigen::MatrixXd::Identity(2, 2)),
               std::invalid_argument);
  EXPECT_THROW(linear_gaussian_bottleneck_mi(scalar(1), scalar(1), scalar(-1)),
               std::invalid_argument);
  EXPECT_THROW(linear_gaussian_bottleneck_mi(Eigen::MatrixXd::Identity(2, 2), scalar(1), scalar(1)),
               std::invalid_argument);
}

}  // namespace
}  // namespace ibvo
