// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0
//
// 6-DOF poses as translation + Euler angles.
//
// Euler convention: intrinsic Z-Y-X (yaw, then pitch, then roll), i.e.
// R = Rz(yaw) * Ry(pitch) * Rx(roll). Angles are stored as r = [roll, pitch,
// yaw] in radians; reports convert to degrees. Pitch must stay clear of
// +/- pi/2 for the matrix -> Euler map to be unique.

#pragma once

#include <Eigen/Core>
#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace ibvo {

using Euler3 = std::array<double, 3>;
using Transform = Eigen::Matrix4d;

inline constexpr double kGimbalMargin = 1e-6;

class GimbalLockError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Pose6 {
  std::array<double, 3> t{};  // meters
  Euler3 r{};                 // radians: roll, pitch, yaw

  static Pose6 identity() { return {}; }
  static Pose6 from_vec(std::span<const double> v);  // [tx, ty, tz, roll, pitch, yaw]
  std::array<double, 6> vec() const { return {t[0], t[1], t[2], r[0], r[1], r[2]}; }

  bool operator==(const Pose6&) const = default;
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

Eigen::Matrix3d euler_to_matrix(const Euler3& r);
/// Throws GimbalLockError within kGimbalMargin of pitch = +/- pi/2 and
/// std::invalid_argument when R is not a proper rotation.
Euler3 matrix_to_euler(const Eigen::Matrix3d& R);

Transform to_transform(const Pose6& p);
Pose6 from_transform(const Transform& T);

/// Group product: the motion `b` expressed in the frame reached by `a`.
Pose6 compose(const Pose6& a, const Pose6& b);
Pose6 inverse(const Pose6& p);

struct Trajectory {
  /// World-frame poses; absolutes[0] is the origin, so there is one more
  /// absolute than relatives.
  std::vector<Transform> absolutes;
  /// relatives[k] moves absolutes[k] to absolutes[k + 1].
  std::vector<Pose6> relatives;
};

Trajectory integrate(std::span<const Pose6> relatives);
std::vector<Pose6> relativize(std::span<const Transform> absolutes);

struct PoseRmse {
  double t_rmse = 0.0;  // meters
  double r_rmse = 0.0;  // degrees
};

/// Root of the mean squared translation error norm, and of the mean squared
/// norm of wrapped Euler-angle differences (reported in degrees).
PoseRmse rmse(std::span<const Pose6> pred, std::span<const Pose6> gt);

/// Rotation angle (radians) of R_a^T R_b; diagnostic only.
double geodesic_angle(const Pose6& a, const Pose6& b);

double rad2deg(double rad);

}  // namespace ibvo
