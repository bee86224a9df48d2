// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ibvo/se3.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ibvo {

namespace {
constexpr double kPi = std::numbers::pi;
}

Pose6 Pose6::from_vec(std::span<const double> v) {
  if (v.size() != 6) {
    throw std::invalid_argument("Pose6::from_vec: expected 6 values, got " +
                                std::to_string(v.size()));
  }
  return Pose6{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double rad2deg(double rad) { return rad * 180.0 / kPi; }

Eigen::Matrix3d euler_to_matrix(const Euler3& r) {
  const Eigen::AngleAxisd roll(r[0], Eigen::Vector3d::UnitX());
  const Eigen::AngleAxisd pitch(r[1], Eigen::Vector3d::UnitY());
  const Eigen::AngleAxisd yaw(r[2], Eigen::Vector3d::UnitZ());
  return (yaw * pitch * roll).toRotationMatrix();
}

Euler3 matrix_to_euler(const Eigen::Matrix3d& R) {
  const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-6 || R.determinant() <= 0) {
    throw std::invalid_argument("matrix_to_euler: not a proper rotation matrix");
  }
  const double s = std::clamp(-R(2, 0), -1.0, 1.0);
  const double pitch = std::asin(s);
  if (std::abs(pitch) >= kPi / 2 - kGimbalMargin) {
    throw GimbalLockError("matrix_to_euler: pitch " + std::to_string(pitch) +
                          " rad is inside the gimbal-lock margin");
  }
  const double roll = std::atan2(R(2, 1), R(2, 2));
  const double yaw = std::atan2(R(1, 0), R(0, 0));
  return {wrap_angle(roll), pitch, wrap_angle(yaw)};
}

Transform to_transform(const Pose6& p) {
  Transform T = Transform::Identity();
  T.topLeftCorner<3, 3>() = euler_to_matrix(p.r);
  T.topRightCorner<3, 1>() = Eigen::Vector3d(p.t[0], p.t[1], p.t[2]);
  return T;
}

Pose6 from_transform(const Transform& T) {
  Pose6 p;
  p.r = matrix_to_euler(T.topLeftCorner<3, 3>());
  p.t = {T(0, 3), T(1, 3), T(2, 3)};
  return p;
}

Pose6 compose(const Pose6& a, const Pose6& b) {
  return from_transform(to_transform(a) * to_transform(b));
}

Pose6 inverse(const Pose6& p) {
  Transform T = to_transform(p);
  Transform inv = Transform::Identity();
  inv.topLeftCorner<3, 3>() = T.topLeftCorner<3, 3>().transpose();
  inv.topRightCorner<3, 1>() = -inv.topLeftCorner<3, 3>() * T.topRightCorner<3, 1>();
  return from_transform(inv);
}

Trajectory integrate(std::span<const Pose6> relatives) {
  Trajectory traj;
  traj.relatives.assign(relatives.begin(), relatives.end());
  traj.absolutes.reserve(relatives.size() + 1);
  traj.absolutes.push_back(Transform::Identity());
  for (const auto& rel : relatives) {
    traj.absolutes.push_back(traj.absolutes.back() * to_transform(rel));
  }
  return traj;
}

std::vector<Pose6> relativize(std::span<const Transform> absolutes) {
  std::vector<Pose6> rel;
  if (absolutes.size() < 2) return rel;
  rel.reserve(absolutes.size() - 1);
  for (std::size_t k = 1; k < absolutes.size(); ++k) {
    const Transform& a = absolutes[k - 1];
    Transform a_inv = Transform::Identity();
    a_inv.topLeftCorner<3, 3>() = a.topLeftCorner<3, 3>().transpose();
    a_inv.topRightCorner<3, 1>() = -a_inv.topLeftCorner<3, 3>() * a.topRightCorner<3, 1>();
    rel.push_back(from_transform(a_inv * absolutes[k]));
  }
  return rel;
}

PoseRmse rmse(std::span<const Pose6> pred, std::span<const Pose6> gt) {
  if (pred.empty()) throw std::invalid_argument("rmse: empty input");
  if (pred.size() != gt.size()) {
    throw std::invalid_argument("rmse: length mismatch " + std::to_string(pred.size()) + " vs " +
                                std::to_string(gt.size()));
  }
  double st = 0.0, sr = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const double dt = pred[i].t[k] - gt[i].t[k];
      const double dr = wrap_angle(pred[i].r[k] - gt[i].r[k]);
      st += dt * dt;
      sr += dr * dr;
    }
  }
  const double n = static_cast<double>(pred.size());
  return {std::sqrt(st / n), rad2deg(std::sqrt(sr / n))};
}

double geodesic_angle(const Pose6& a, const Pose6& b) {
  const Eigen::Matrix3d d = euler_to_matrix(a.r).transpose() * euler_to_matrix(b.r);
  const double c = std::clamp((d.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

}  // namespace ibvo
