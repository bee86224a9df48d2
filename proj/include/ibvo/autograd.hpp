// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0
//
// Tape-based reverse-mode differentiation over ibvo::Tensor.
//
// A Graph records operations in creation order, which is a topological order
// because every op can only consume nodes that already exist. backward() walks
// the tape once from the output towards the leaves. Nodes that do not depend
// on a trainable leaf carry no backward rule and are skipped.
//
// Broadcasting is limited to adding a length-m bias vector to each row of an
// [n, m] matrix.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ibvo/tensor.hpp"

namespace ibvo {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the Graph lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Graph* graph() const { return graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

class Graph {
 public:
  /// Accumulates the op's input gradients given the output gradient.
  using BackwardFn = std::function<void(Graph&, std::span<const double> out_grad)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// A leaf that receives a gradient in backward().
  Var parameter(Tensor value);

  /// Appends an op node. `fn` is dropped when no input requires a gradient.
  Var record(const char* op, Tensor value, std::span<const Var> inputs, BackwardFn fn);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(const Var& v) const { return requires_grad(v.id()); }
  std::size_t size() const { return nodes_.size(); }

  /// Gradient buffer of a node; valid inside backward rules and after backward().
  std::vector<double>& grad_buffer(std::size_t id);

  /// Reverse sweep from a rank-0 output. Resets all previous gradients.
  void backward(const Var& output);

  /// Gradient of the last backward() output w.r.t. `v`; zeros if unreached.
  Tensor grad(const Var& v) const;

  /// Number of nodes whose backward rule ran during the last backward().
  std::size_t visited() const { return visited_; }

 private:
  struct Node {
    Tensor value;
    bool requires_grad = false;
    BackwardFn backward;
    std::vector<double> grad;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  std::size_t visited_ = 0;
};

// ---------------------------------------------------------------------------
// Op set. All ops validate shapes and throw ShapeError naming both shapes.

Var matmul(const Var& a, const Var& b);
/// Elementwise sum of equal shapes, or [n, m] + [m] (bias added to each row).
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double c);

Var concat(std::span<const Var> parts, std::size_t axis);
Var concat(std::initializer_list<Var> parts, std::size_t axis);
/// Half-open range [begin, end) along `axis`.
Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end);
/// Repeats a [n, m] matrix `times` along axis 1 to [n, m * times].
Var tile_columns(const Var& a, std::size_t times);

Var sum(const Var& a);
Var sum(const Var& a, std::size_t axis);
Var mean(const Var& a);
Var mean(const Var& a, std::size_t axis);

/// relu'(0) is defined as 0.
Var relu(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var square(const Var& a);
/// sqrt'(0) is defined as 0.
Var sqrt(const Var& a);
/// Euclidean norm along `axis`; the gradient at a zero vector is 0.
Var l2_norm(const Var& a, std::size_t axis);
Var l2_norm(const Var& a);

/// Reparameterized draw mu + std * noise. `noise` is supplied by the caller;
/// every std entry must be positive.
Var gaussian_sample(const Var& mu, const Var& std, const Var& noise);

/// KL(p || q) between diagonal Gaussians, summed over every entry:
/// sum log(sq/sp) + (sp^2 + (mp - mq)^2) / (2 sq^2) - 1/2.
Var kl_diag_gauss(const Var& mu_p, const Var& std_p, const Var& mu_q, const Var& std_q);

// ---------------------------------------------------------------------------
// Finite-difference gradient checking.

class NonDeterministicError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Builds a scalar from leaves holding the given parameter values.
using GraphBuilder = std::function<Var(Graph&, std::span<const Var>)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;
  double floor = 0.0;  // denominator floor used for the relative error
  bool passed = false;
  std::vector<Tensor> analytic;
  std::vector<Tensor> numeric;
};

/// |a - b| / max(floor, |a| + |b|).
double grad_rel_error(double analytic, double numeric, double floor = 1e-8);

/// Compares backward() against central differences on every coordinate.
/// Coordinates whose gradient sits below the difference quotient's rounding
/// resolution cannot be compared relatively, so the denominator is floored
/// at 1e4 * DBL_EPSILON * max(1, |f|) / eps (and at least 1e-8).
/// Throws NonDeterministicError when two identical evaluations disagree.
GradCheckReport grad_check(const GraphBuilder& f, std::span<const Tensor> params, double eps,
                           double tol);

}  // namespace ibvo
