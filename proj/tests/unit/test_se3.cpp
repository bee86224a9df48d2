// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ibvo/se3.hpp"

namespace ibvo {
namespace {

constexpr double kPi = std::numbers::pi;

Pose6 random_pose(std::mt19937_64& gen, double angle = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Pose6 p;
  for (auto& x : p.t) x = 3.0 * u(gen);
  p.r = {angle * u(gen), std::min(angle, 1.3) * u(gen), angle * u(gen)};
  return p;
}

void expect_pose_near(const Pose6& a, const Pose6& b, double tol) {
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(a.t[i], b.t[i], tol) << "t" << i;
    EXPECT_NEAR(wrap_angle(a.r[i] - b.r[i]), 0.0, tol) << "r" << i;
  }
}

TEST(Euler, ZeroIsIdentity) {
  EXPECT_TRUE(euler_to_matrix({0, 0, 0}).isApprox(Eigen::Matrix3d::Identity(), 0.0));
}

TEST(Euler, QuarterYawTurnsXIntoY) {
  const Eigen::Vector3d y = euler_to_matrix({0, 0, kPi / 2}) * Eigen::Vector3d::UnitX();
  EXPECT_NEAR((y - Eigen::Vector3d::UnitY()).norm(), 0.0, 1e-15);
}

TEST(Euler, RoundTrip) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> a(-kPi + 1e-3, kPi), p(-1.5, 1.5);
  for (int k = 0; k < 500; ++k) {
    const Euler3 r{a(gen), p(gen), a(gen)};
    const Euler3 back = matrix_to_euler(euler_to_matrix(r));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(back[i], r[i], 1e-9);
  }
}

TEST(Euler, MatricesAreProperRotations) {
  std::mt19937_64 gen(2);
  for (int k = 0; k < 100; ++k) {
    const Eigen::Matrix3d R = euler_to_matrix(random_pose(gen, 3.0).r);
    EXPECT_NEAR((R.transpose() * R - Eigen::Matrix3d::Identity()).norm(), 0.0, 1e-9);
    EXPECT_NEAR(R.determinant(), 1.0, 1e-9);
  }
}

TEST(Euler, GimbalLockIsAnError) {
  EXPECT_THROW(matrix_to_euler(euler_to_matrix({0.1, kPi / 2, 0.2})), GimbalLockError);
  EXPECT_THROW(matrix_to_euler(euler_to_matrix({0.1, -kPi / 2, 0.2})), GimbalLockError);
}

TEST(Euler, WrapRange) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(0.25 + 4 * kPi), 0.25, 1e-14);
}

TEST(Compose, IdentityIsNeutral) {
  std::mt19937_64 gen(3);
  const Pose6 p = random_pose(gen);
  expect_pose_near(compose(p, Pose6::identity()), p, 1e-12);
  expect_pose_near(compose(Pose6::identity(), p), p, 1e-12);
}

TEST(Compose, TwoQuarterTurnsMakeHalfTurn) {
  Pose6 q;
  q.r = {0, 0, kPi / 2};
  const Pose6 h = compose(q, q);
  EXPECT_NEAR(std::abs(h.r[2]), kPi, 1e-12);
}

TEST(Compose, Associative) {
  std::mt19937_64 gen(4);
  for (int k = 0; k < 200; ++k) {
    const Pose6 a = random_pose(gen, 0.5), b = random_pose(gen, 0.5), c = random_pose(gen, 0.5);
    expect_pose_near(compose(compose(a, b), c), compose(a, compose(b, c)), 1e-9);
  }
}

TEST(Compose, InverseCancels) {
  std::mt19937_64 gen(5);
  const Pose6 p = random_pose(gen);
  expect_pose_near(compose(p, inverse(p)), Pose6::identity(), 1e-12);
}

TEST(Trajectory, RelativizeThenIntegrateRecoversAbsolutes) {
  std::mt19937_64 gen(6);
  std::vector<Pose6> rel;
  for (int k = 0; k < 20; ++k) rel.push_back(random_pose(gen, 0.3));
  const Trajectory tr = integrate(rel);
  ASSERT_EQ(tr.absolutes.size(), 21u);
  const Trajectory again = integrate(relativize(tr.absolutes));
  for (std::size_t k = 0; k < tr.absolutes.size(); ++k) {
    EXPECT_LT((again.absolutes[k] - tr.absolutes[k]).cwiseAbs().maxCoeff(), 1e-8) << k;
  }
  for (std::size_t k = 1; k < tr.absolutes.size(); ++k) {
    const Transform step = tr.absolutes[k - 1] * to_transform(rel[k - 1]);
    EXPECT_LT((step - tr.absolutes[k]).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Rmse, Examples) {
  std::mt19937_64 gen(7);
  std::vector<Pose6> gt{random_pose(gen), random_pose(gen)};
  const PoseRmse zero = rmse(gt, gt);
  EXPECT_EQ(zero.t_rmse, 0.0);
  EXPECT_EQ(zero.r_rmse, 0.0);

  Pose6 a, b;
  b.t = {3, 4, 0};
  EXPECT_DOUBLE_EQ(rmse(std::vector{b}, std::vector{a}).t_rmse, 5.0);
  EXPECT_DOUBLE_EQ(rmse(std::vector{b}, std::vector{a}).r_rmse, 0.0);

  Pose6 c, d;
  c.t = {3, 0, 0};
  d.t = {0, 4, 0};
  EXPECT_NEAR(rmse(std::vector{c, d}, std::vector{a, a}).t_rmse, std::sqrt(25.0 / 2.0), 1e-15);
}

TEST(Rmse, EmptyOrMismatchedIsAnError) {
  EXPECT_THROW(rmse(std::vector<Pose6>{}, std::vector<Pose6>{}), std::invalid_argument);
  EXPECT_THROW(rmse(std::vector<Pose6>(2), std::vector<Pose6>(1)), std::invalid_argument);
}

TEST(Rmse, PermutationInvariant) {
  std::mt19937_64 gen(8);
  std::vector<Pose6> p, g;
  for (int k = 0; k < 10; ++k) {
    p.push_back(random_pose(gen));
    g.push_back(random_pose(gen));
  }
  const PoseRmse base = rmse(p, g);
  std::vector<std::size_t> idx(10);
  for (std::size_t i = 0; i < 10; ++i) idx[i] = 9 - i;
  std::vector<Pose6> p2, g2;
  for (auto i : idx) {
    p2.push_back(p[i]);
    g2.push_back(g[i]);
  }
  EXPECT_NEAR(rmse(p2, g2).t_rmse, base.t_rmse, 1e-14);
  EXPECT_NEAR(rmse(p2, g2).r_rmse, base.r_rmse, 1e-12);
}

TEST(Rmse, WrapsAcrossPi) {
  Pose6 a, b;
  a.r[2] = kPi - 0.01;
  b.r[2] = -kPi + 0.01;
  EXPECT_NEAR(rmse(std::vector{a}, std::vector{b}).r_rmse, rad2deg(0.02), 1e-9);
}

TEST(Geodesic, PureYaw) {
  Pose6 a, b;
  b.r[2] = 0.3;
  EXPECT_NEAR(geodesic_angle(a, b), 0.3, 1e-12);
}

}  // namespace
}  // namespace ibvo
