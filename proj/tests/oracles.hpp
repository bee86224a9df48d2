// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations for tests. Nothing here calls into the
// library's math: sampling uses std::mt19937_64, sums are written out.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ibvo::oracle {

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline McEstimate mean_and_stderr(double sum, double sum_sq, std::size_t n) {
  const double m = sum / static_cast<double>(n);
  const double var = (sum_sq / static_cast<double>(n) - m * m) * static_cast<double>(n) /
                     static_cast<double>(n - 1);
  return {m, std::sqrt(std::max(var, 0.0) / static_cast<double>(n))};
}

/// E_p[log p(x) - log q(x)] for diagonal Gaussians by sampling x ~ p.
inline McEstimate mc_kl(const std::vector<double>& mu_p, const std::vector<double>& std_p,
                        const std::vector<double>& mu_q, const std::vector<double>& std_q,
                        std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  double s = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < draws; ++k) {
    double v = 0.0;
    for (std::size_t i = 0; i < mu_p.size(); ++i) {
      const double x = mu_p[i] + std_p[i] * z(gen);
      const double a = (x - mu_p[i]) / std_p[i];
      const double b = (x - mu_q[i]) / std_q[i];
      v += -std::log(std_p[i]) - 0.5 * a * a + std::log(std_q[i]) + 0.5 * b * b;
    }
    s += v;
    s2 += v * v;
  }
  return mean_and_stderr(s, s2, draws);
}

/// Scalar channel y = a x + w, x ~ N(0, sx2), w ~ N(0, r): Monte-Carlo
/// estimate of I(w; y) = E[log p(y|w) - log p(y)], the information the noise
/// carries into y beyond the noiseless image a x.
inline McEstimate mc_gaussian_channel_mi(double a, double sx2, double r, std::size_t draws,
                                         std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const double vy = a * a * sx2 + r;
  double s = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < draws; ++k) {
    const double x = std::sqrt(sx2) * z(gen);
    const double w = std::sqrt(r) * z(gen);
    const double y = a * x + w;
    const double vx = a * a * sx2;
    const double v = (-0.5 * std::log(vx) - 0.5 * (y - w) * (y - w) / vx) -
                     (-0.5 * std::log(vy) - 0.5 * y * y / vy);
    s += v;
    s2 += v * v;
  }
  return mean_and_stderr(s, s2, draws);
}

/// Mutual information of a 2-D table by direct summation.
inline double table_mi(const std::vector<std::vector<double>>& p) {
  std::vector<double> pa(p.size(), 0.0), pb(p[0].size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p[i].size(); ++j) {
      pa[i] += p[i][j];
      pb[j] += p[i][j];
    }
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p[i].size(); ++j) {
      if (p[i][j] > 0) mi += p[i][j] * std::log(p[i][j] / (pa[i] * pb[j]));
    }
  }
  return mi;
}

/// Central finite difference of f at x along coordinate i.
template <class F>
double central_difference(F&& f, std::vector<double> x, std::size_t i, double eps) {
  const double x0 = x[i];
  x[i] = x0 + eps;
  const double up = f(x);
  x[i] = x0 - eps;
  const double down = f(x);
  return (up - down) / (2.0 * eps);
}

}  // namespace ibvo::oracle
