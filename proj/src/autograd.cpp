// Copyright 2026 The ibvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ibvo/autograd.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace ibvo {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

Tensor make(const char* op, Shape shape, std::vector<double> data) {
  require_finite(data, op);
  return Tensor(std::move(shape), std::move(data));
}

void require_same_graph(const Var& a, const Var& b, const char* op) {
  if (!a.valid() || !b.valid()) throw std::invalid_argument(std::string(op) + ": invalid Var");
  if (a.graph() != b.graph()) {
    throw std::invalid_argument(std::string(op) + ": operands belong to different graphs");
  }
}

[[noreturn]] void shape_mismatch(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                   shape_str(b));
}

void require_rank(const char* op, const Var& a, std::size_t rank) {
  if (a.shape().size() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                     ", got shape " + shape_str(a.shape()));
  }
}

// Splits a shape around `axis` into (outer, extent, inner).
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_axis(const char* op, const Shape& s, std::size_t axis) {
  if (axis >= s.size()) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                     " out of range for shape " + shape_str(s));
  }
  AxisSplit r;
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  r.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

template <class F>
void with_grad(Graph& g, std::size_t id, F&& fn) {
  if (g.requires_grad(id)) fn(g.grad_buffer(id));
}

// Unary elementwise op given f(x) and f'(x, y) with y = f(x).
template <class F, class D>
Var unary(const char* op, const Var& a, F f, D df) {
  const auto& x = a.value();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i]);
  const auto ia = a.id();
  const Var inputs[] = {a};
  auto* g = a.graph();
  return g->record(op, make(op, x.shape(), std::move(out)), inputs,
                   [ia, df](Graph& g, std::span<const double> go) {
                     with_grad(g, ia, [&](std::vector<double>& ga) {
                       const auto& xv = g.value(ia);
                       for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[i] * df(xv[i]);
                     });
                   });
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

// ---------------------------------------------------------------------------
// Var / Graph

const Tensor& Var::value() const {
  if (!graph_) throw std::invalid_argument("Var: uninitialized handle");
  return graph_->value(id_);
}

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::parameter(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Graph::record(const char* op, Tensor value, std::span<const Var> inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  for (const auto& in : inputs) {
    if (in.graph() != this) {
      throw std::invalid_argument(std::string(op) + ": input from a different graph");
    }
    n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

std::vector<double>& Graph::grad_buffer(std::size_t id) {
  auto& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

void Graph::backward(const Var& output) {
  if (output.graph() != this) throw std::invalid_argument("backward: output from another graph");
  if (output.shape().size() != 0) {
    throw ShapeError("backward: output must be a scalar of shape [], got " +
                     shape_str(output.shape()));
  }
  for (auto& n : nodes_) {
    n.grad.clear();
  }
  visited_ = 0;
  if (!nodes_[output.id()].requires_grad) return;
  grad_buffer(output.id())[0] = 1.0;
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (n.grad.empty()) continue;
    require_finite(n.grad, "backward: gradient");
    if (n.backward) {
      // Rules only write into buffers of earlier nodes, so this span stays valid.
      n.backward(*this, std::span<const double>(n.grad));
      ++visited_;
    }
  }
}

Tensor Graph::grad(const Var& v) const {
  const auto& n = nodes_.at(v.id());
  if (n.grad.empty()) return Tensor::zeros(n.value.shape().empty() ? Shape{} : n.value.shape());
  return Tensor(n.value.shape(), n.grad);
}

// ---------------------------------------------------------------------------
// Linear algebra and arithmetic

Var matmul(const Var& a, const Var& b) {
  require_same_graph(a, b, "matmul");
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) shape_mismatch("matmul", sa, sb);
  const std::size_t n = sa[0], k = sa[1], m = sb[1];
  std::vector<double> out(n * m);
  MutMap(out.data(), n, m).noalias() =
      ConstMap(a.value().data().data(), n, k) * ConstMap(b.value().data().data(), k, m);
  const auto ia = a.id(), ib = b.id();
  const Var inputs[] = {a, b};
  return a.graph()->record(
      "matmul", make("matmul", {n, m}, std::move(out)), inputs,
      [ia, ib, n, k, m](Graph& g, std::span<const double> go) {
        ConstMap gout(go.data(), n, m);
        with_grad(g, ia, [&](std::vector<double>& ga) {
          MutMap(ga.data(), n, k).noalias() +=
              gout * ConstMap(g.value(ib).data().data(), k, m).transpose();
        });
        with_grad(g, ib, [&](std::vector<double>& gb) {
          MutMap(gb.data(), k, m).noalias() +=
              ConstMap(g.value(ia).data().data(), n, k).transpose() * gout;
        });
      });
}

Var add(const Var& a, const Var& b) {
  require_same_graph(a, b, "add");
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  const auto ia = a.id(), ib = b.id();
  const Var inputs[] = {a, b};
  const auto& va = a.value();
  const auto& vb = b.value();
  if (sa == sb) {
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] + vb[i];
    return a.graph()->record("add", make("add", sa, std::move(out)), inputs,
                             [ia, ib](Graph& g, std::span<const double> go) {
                               with_grad(g, ia, [&](std::vector<double>& ga) {
                                 for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[i];
                               });
                               with_grad(g, ib, [&](std::vector<double>& gb) {
                                 for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += go[i];
                               });
                             });
  }
  if (sa.size() == 2 && sb.size() == 1 && sa[1] == sb[0]) {
    const std::size_t n = sa[0], m = sa[1];
    std::vector<double> out(va.size());
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < m; ++c) out[r * m + c] = va[r * m + c] + vb[c];
    }
    return a.graph()->record("add", make("add", sa, std::move(out)), inputs,
                             [ia, ib, n, m](Graph& g, std::span<const double> go) {
                               with_grad(g, ia, [&](std::vector<double>& ga) {
                                 for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[i];
                               });
                               with_grad(g, ib, [&](std::vector<double>& gb) {
                                 for (std::size_t r = 0; r < n; ++r) {
                                   for (std::size_t c = 0; c < m; ++c) gb[c] += go[r * m + c];
                                 }
                               });
                             });
  }
  shape_mismatch("add", sa, sb);
}

Var sub(const Var& a, const Var& b) {
  require_same_graph(a, b, "sub");
  if (a.shape() != b.shape()) shape_mismatch("sub", a.shape(), b.shape());
  const auto& va = a.value();
  const auto& vb = b.value();
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] - vb[i];
  const auto ia = a.id(), ib = b.id();
  const Var inputs[] = {a, b};
  return a.graph()->record("sub", make("sub", a.shape(), std::move(out)), inputs,
                           [ia, ib](Graph& g, std::span<const double> go) {
                             with_grad(g, ia, [&](std::vector<double>& ga) {
                               for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[i];
                             });
                             with_grad(g, ib, [&](std::vector<double>& gb) {
                               for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= go[i];
                             });
                           });
}

Var mul(const Var& a, const Var& b) {
  require_same_graph(a, b, "mul");
  if (a.shape() != b.shape()) shape_mismatch("mul", a.shape(), b.shape());
  const auto& va = a.value();
  const auto& vb = b.value();
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] * vb[i];
  const auto ia = a.id(), ib = b.id();
  const Var inputs[] = {a, b};
  return a.graph()->record("mul", make("mul", a.shape(), std::move(out)), inputs,
                           [ia, ib](Graph& g, std::span<const double> go) {
                             with_grad(g, ia, [&](std::vector<double>& ga) {
                               const auto& vb = g.value(ib);
                               for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[i] * vb[i];
                             });
                             with_grad(g, ib, [&](std::vector<double>& gb) {
                               const auto& va = g.value(ia);
                               for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += go[i] * va[i];
                             });
                           });
}

Var scale(const Var& a, double factor) {
  return unary(
      "scale", a, [factor](double x) { return factor * x; },
      [factor](double) { return factor; });
}

Var add_scalar(const Var& a, double c) {
  return unary(
      "add_scalar", a, [c](double x) { return x + c; }, [](double) { return 1.0; });
}

// ---------------------------------------------------------------------------
// Structural ops

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& s0 = parts[0].shape();
  const auto split0 = split_axis("concat", s0, axis);
  std::size_t total = 0;
  std::vector<std::size_t> extents;
  for (const auto& p : parts) {
    require_same_graph(parts[0], p, "concat");
    const Shape& s = p.shape();
    if (s.size() != s0.size()) shape_mismatch("concat", s0, s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i != axis && s[i] != s0[i]) shape_mismatch("concat", s0, s);
    }
    extents.push_back(s[axis]);
    total += s[axis];
  }
  const std::size_t outer = split0.outer, inner = split0.inner;
  Shape out_shape = s0;
  out_shape[axis] = total;
  std::vector<double> out(outer * total * inner);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& v = parts[p].value();
    const std::size_t e = extents[p];
    for (std::size_t o = 0; o < outer; ++o) {
      std::memcpy(&out[(o * total + offset) * inner], &v.data()[o * e * inner],
                  e * inner * sizeof(double));
    }
    offset += e;
  }
  std::vector<std::size_t> ids;
  for (const auto& p : parts) ids.push_back(p.id());
  return parts[0].graph()->record(
      "concat", make("concat", out_shape, std::move(out)), parts,
      [ids, extents, outer, inner, total](Graph& g, std::span<const double> go) {
        std::size_t offset = 0;
        for (std::size_t p = 0; p < ids.size(); ++p) {
          const std::size_t e = extents[p];
          with_grad(g, ids[p], [&](std::vector<double>& gp) {
            for (std::size_t o = 0; o < outer; ++o) {
              const double* src = &go[(o * total + offset) * inner];
              double* dst = &gp[o * e * inner];
              for (std::size_t i = 0; i < e * inner; ++i) dst[i] += src[i];
            }
          });
          offset += e;
        }
      });
}

Var concat(std::initializer_list<Var> parts, std::size_t axis) {
  return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}

Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end) {
  const auto sp = split_axis("slice", a.shape(), axis);
  if (begin >= end || end > sp.extent) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for axis " + std::to_string(axis) + " of shape " +
                     shape_str(a.shape()));
  }
  const std::size_t len = end - begin, outer = sp.outer, inner = sp.inner, ext = sp.extent;
  Shape out_shape = a.shape();
  out_shape[axis] = len;
  std::vector<double> out(outer * len * inner);
  const auto& v = a.value();
  for (std::size_t o = 0; o < outer; ++o) {
    std::memcpy(&out[o * len * inner], &v.data()[(o * ext + begin) * inner],
                len * inner * sizeof(double));
  }
  const auto ia = a.id();
  const Var inputs[] = {a};
  return a.graph()->record("slice", make("slice", out_shape, std::move(out)), inputs,
                           [=](Graph& g, std::span<const double> go) {
                             with_grad(g, ia, [&](std::vector<double>& ga) {
                               for (std::size_t o = 0; o < outer; ++o) {
                                 double* dst = &ga[(o * ext + begin) * inner];
                                 const double* src = &go[o * len * inner];
                                 for (std::size_t i = 0; i < len * inner; ++i) dst[i] += src[i];
                               }
                             });
                           });
}

Var tile_columns(const Var& a, std::size_t times) {
  require_rank("tile_columns", a, 2);
  if (times == 0) throw ShapeError("tile_columns: times must be positive");
  const std::size_t n = a.shape()[0], m = a.shape()[1];
  const auto& v = a.value();
  std::vector<double> out(n * m * times);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t t = 0; t < times; ++t) {
      for (std::size_t c = 0; c < m; ++c) out[(r * times + t) * m + c] = v[r * m + c];
    }
  }
  const auto ia = a.id();
  const Var inputs[] = {a};
  return a.graph()->record("tile_columns", make("tile_columns", {n, m * times}, std::move(out)),
                           inputs, [=](Graph& g, std::span<const double> go) {
                             with_grad(g, ia, [&](std::vector<double>& ga) {
                               for (std::size_t r = 0; r < n; ++r) {
                                 for (std::size_t t = 0; t < times; ++t) {
                                   for (std::size_t c = 0; c < m; ++c) {
                                     ga[r * m + c] += go[(r * times + t) * m + c];
                                   }
                                 }
                               }
                             });
                           });
}

// ---------------------------------------------------------------------------
// Reductions

Var sum(const Var& a) {
  const auto& v = a.value();
  double s = 0.0;
  for (double x : v.data()) s += x;
  const auto ia = a.id();
  const Var inputs[] = {a};
  return a.graph()->record("sum", make("sum", {}, {s}), inputs,
                           [ia](Graph& g, std::span<const double> go) {
                             with_grad(g, ia, [&](std::vector<double>& ga) {
                               for (auto& x : ga) x += go[0];
                             });
                           });
}

Var sum(const Var& a, std::size_t axis) {
  const auto sp = split_axis("sum", a.shape(), axis);
  Shape out_shape;
  for (std::size_t i = 0; i < a.shape().size(); ++i) {
    if (i != axis) out_shape.push_back(a.shape()[i]);
  }
  const std::size_t outer = sp.outer, ext = sp.extent, inner = sp.inner;
  const auto& v = a.value();
  std::vector<double> out(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t e = 0; e < ext; ++e) {
      for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] += v[(o * ext + e) * inner + i];
    }
  }
  const auto ia = a.id();
  const Var inputs[] = {a};
  return a.graph()->record("sum", make("sum", out_shape, std::move(out)), inputs,
                           [=](Graph& g, std::span<const double> go) {
                             with_grad(g, ia, [&](std::vector<double>& ga) {
                               for (std::size_t o = 0; o < outer; ++o) {
                                 for (std::size_t e = 0; e < ext; ++e) {
                                   for (std::size_t i = 0; i < inner; ++i) {
                                     ga[(o * ext + e) * inner + i] += go[o * inner + i];
                                   }
                                 }
                               }
                             });
                           });
}

Var mean(const Var& a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var mean(const Var& a, std::size_t axis) {
  const auto n = split_axis("mean", a.shape(), axis).extent;
  return scale(sum(a, axis), 1.0 / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Elementwise nonlinearities

Var relu(const Var& a) {
  return unary(
      "relu", a, [](double x) { return x > 0 ? x : 0.0; },
      [](double x) { return x > 0 ? 1.0 : 0.0; });
}

Var tanh(const Var& a) {
  return unary(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double x) {
        const double y = std::tanh(x);
        return 1.0 - y * y;
      });
}

Var sigmoid(const Var& a) {
  return unary("sigmoid", a, stable_sigmoid, [](double x) {
    const double y = stable_sigmoid(x);
    return y * (1.0 - y);
  });
}

Var softplus(const Var& a) { return unary("softplus", a, stable_softplus, stable_sigmoid); }

Var exp(const Var& a) {
  return unary(
      "exp", a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Var log(const Var& a) {
  for (double x : a.value().data()) {
    if (!(x > 0)) throw NumericError("log: non-positive input " + std::to_string(x));
  }
  return unary(
      "log", a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Var square(const Var& a) {
  return unary(
      "square", a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var sqrt(const Var& a) {
  for (double x : a.value().data()) {
    if (x < 0) throw NumericError("sqrt: negative input " + std::to_string(x));
  }
  return unary(
      "sqrt", a, [](double x) { return std::sqrt(x); },
      [](double x) { return x > 0 ? 0.5 / std::sqrt(x) : 0.0; });
}

Var l2_norm(const Var& a, std::size_t axis) {
  const auto sp = split_axis("l2_norm", a.shape(), axis);
  Shape out_shape;
  for (std::size_t i = 0; i < a.shape().size(); ++i) {
    if (i != axis) out_shape.push_back(a.shape()[i]);
  }
  const std::size_t outer = sp.outer, ext = sp.extent, inner = sp.inner;
  const auto& v = a.value();
  std::vector<double> out(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t e = 0; e < ext; ++e) {
      for (std::size_t i = 0; i < inner; ++i) {
        const double x = v[(o * ext + e) * inner + i];
        out[o * inner + i] += x * x;
      }
    }
  }
  for (auto& x : out) x = std::sqrt(x);
  const auto ia = a.id();
  const Var inputs[] = {a};
  std::vector<double> norms = out;
  return a.graph()->record(
      "l2_norm", make("l2_norm", out_shape, std::move(out)), inputs,
      [=, norms = std::move(norms)](Graph& g, std::span<const double> go) {
        with_grad(g, ia, [&](std::vector<double>& ga) {
          const auto& x = g.value(ia);
          for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t i = 0; i < inner; ++i) {
              const double nrm = norms[o * inner + i];
              if (nrm == 0.0) continue;
              const double gg = go[o * inner + i] / nrm;
              for (std::size_t e = 0; e < ext; ++e) {
                const std::size_t idx = (o * ext + e) * inner + i;
                ga[idx] += gg * x[idx];
              }
            }
          }
        });
      });
}

Var l2_norm(const Var& a) {
  const auto& v = a.value();
  double s = 0.0;
  for (double x : v.data()) s += x * x;
  const double nrm = std::sqrt(s);
  const auto ia = a.id();
  const Var inputs[] = {a};
  return a.graph()->record("l2_norm", make("l2_norm", {}, {nrm}), inputs,
                           [ia, nrm](Graph& g, std::span<const double> go) {
                             if (nrm == 0.0) return;
                             with_grad(g, ia, [&](std::vector<double>& ga) {
                               const auto& x = g.value(ia);
                               for (std::size_t i = 0; i < ga.size(); ++i) {
                                 ga[i] += go[0] * x[i] / nrm;
                               }
                             });
                           });
}

// ---------------------------------------------------------------------------
// Gaussian helpers

Var gaussian_sample(const Var& mu, const Var& std, const Var& noise) {
  require_same_graph(mu, std, "gaussian_sample");
  require_same_graph(mu, noise, "gaussian_sample");
  if (mu.shape() != std.shape()) shape_mismatch("gaussian_sample", mu.shape(), std.shape());
  if (mu.shape() != noise.shape()) shape_mismatch("gaussian_sample", mu.shape(), noise.shape());
  const auto& m = mu.value();
  const auto& s = std.value();
  const auto& z = noise.value();
  std::vector<double> out(m.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(s[i] > 0)) {
      throw std::invalid_argument("gaussian_sample: non-positive std " + std::to_string(s[i]) +
                                  " at index " + std::to_string(i));
    }
    out[i] = m[i] + s[i] * z[i];
  }
  const auto im = mu.id(), is = std.id(), iz = noise.id();
  const Var inputs[] = {mu, std, noise};
  return mu.graph()->record(
      "gaussian_sample", make("gaussian_sample", mu.shape(), std::move(out)), inputs,
      [im, is, iz](Graph& g, std::span<const double> go) {
        with_grad(g, im, [&](std::vector<double>& gm) {
          for (std::size_t i = 0; i < gm.size(); ++i) gm[i] += go[i];
        });
        with_grad(g, is, [&](std::vector<double>& gs) {
          const auto& z = g.value(iz);
          for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += go[i] * z[i];
        });
        with_grad(g, iz, [&](std::vector<double>& gz) {
          const auto& s = g.value(is);
          for (std::size_t i = 0; i < gz.size(); ++i) gz[i] += go[i] * s[i];
        });
      });
}

Var kl_diag_gauss(const Var& mu_p, const Var& std_p, const Var& mu_q, const Var& std_q) {
  for (const Var* v : {&std_p, &mu_q, &std_q}) {
    require_same_graph(mu_p, *v, "kl_diag_gauss");
    if (v->shape() != mu_p.shape()) shape_mismatch("kl_diag_gauss", mu_p.shape(), v->shape());
  }
  const auto& mp = mu_p.value();
  const auto& sp = std_p.value();
  const auto& mq = mu_q.value();
  const auto& sq = std_q.value();
  double total = 0.0;
  for (std::size_t i = 0; i < mp.size(); ++i) {
    if (!(sp[i] > 0) || !(sq[i] > 0)) {
      throw std::invalid_argument("kl_diag_gauss: non-positive std at index " +
                                  std::to_string(i));
    }
    // -log(rho) + (rho^2 - 1)/2 written through log1p so it stays >= 0 near rho = 1.
    const double rho = sp[i] / sq[i];
    const double u = rho * rho - 1.0;
    const double dm = (mp[i] - mq[i]) / sq[i];
    total += 0.5 * (u - std::log1p(u)) + 0.5 * dm * dm;
  }
  const auto imp = mu_p.id(), isp = std_p.id(), imq = mu_q.id(), isq = std_q.id();
  const Var inputs[] = {mu_p, std_p, mu_q, std_q};
  return mu_p.graph()->record(
      "kl_diag_gauss", make("kl_diag_gauss", {}, {total}), inputs,
      [=](Graph& g, std::span<const double> go) {
        const auto& mp = g.value(imp);
        const auto& sp = g.value(isp);
        const auto& mq = g.value(imq);
        const auto& sq = g.value(isq);
        const double s = go[0];
        with_grad(g, imp, [&](std::vector<double>& gr) {
          for (std::size_t i = 0; i < gr.size(); ++i) {
            gr[i] += s * (mp[i] - mq[i]) / (sq[i] * sq[i]);
          }
        });
        with_grad(g, imq, [&](std::vector<double>& gr) {
          for (std::size_t i = 0; i < gr.size(); ++i) {
            gr[i] -= s * (mp[i] - mq[i]) / (sq[i] * sq[i]);
          }
        });
        with_grad(g, isp, [&](std::vector<double>& gr) {
          for (std::size_t i = 0; i < gr.size(); ++i) {
            gr[i] += s * (sp[i] / (sq[i] * sq[i]) - 1.0 / sp[i]);
          }
        });
        with_grad(g, isq, [&](std::vector<double>& gr) {
          for (std::size_t i = 0; i < gr.size(); ++i) {
            const double dm = mp[i] - mq[i];
            gr[i] += s * (1.0 / sq[i] - (sp[i] * sp[i] + dm * dm) / (sq[i] * sq[i] * sq[i]));
          }
        });
      });
}

// ---------------------------------------------------------------------------
// Gradient checking

double grad_rel_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max(floor, std::abs(analytic) + std::abs(numeric));
}

namespace {

double evaluate_scalar(const GraphBuilder& f, std::span<const Tensor> params) {
  Graph g;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const auto& p : params) leaves.push_back(g.constant(p));
  const Var out = f(g, leaves);
  if (out.shape().size() != 0) {
    throw ShapeError("grad_check: builder must return a scalar, got " + shape_str(out.shape()));
  }
  return out.value().item();
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

}  // namespace

GradCheckReport grad_check(const GraphBuilder& f, std::span<const Tensor> params, double eps,
                           double tol) {
  if (!(eps > 0)) throw std::invalid_argument("grad_check: eps must be positive");
  const double first = evaluate_scalar(f, params);
  const double second = evaluate_scalar(f, params);
  if (!same_bits(first, second)) {
    std::ostringstream os;
    os.precision(17);
    os << "grad_check: builder is not deterministic (" << first << " vs " << second << ")";
    throw NonDeterministicError(os.str());
  }

  GradCheckReport report;
  report.floor = std::max(
      1e-8, 1e4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(first)) / eps);
  {
    Graph g;
    std::vector<Var> leaves;
    for (const auto& p : params) leaves.push_back(g.parameter(p));
    const Var out = f(g, leaves);
    if (!same_bits(out.value().item(), first)) {
      throw NonDeterministicError("grad_check: builder output depends on leaf kind");
    }
    g.backward(out);
    for (const auto& l : leaves) report.analytic.push_back(g.grad(l));
  }

  std::vector<Tensor> work(params.begin(), params.end());
  for (std::size_t p = 0; p < params.size(); ++p) {
    const Tensor original = params[p];
    std::vector<double> numeric(original.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
      std::vector<double> d = original.values();
      d[i] = original[i] + eps;
      work[p] = Tensor(original.shape(), d);
      const double up = evaluate_scalar(f, work);
      d[i] = original[i] - eps;
      work[p] = Tensor(original.shape(), d);
      const double down = evaluate_scalar(f, work);
      numeric[i] = (up - down) / (2.0 * eps);
      const double err = grad_rel_error(report.analytic[p][i], numeric[i], report.floor);
      if (err > report.max_rel_error || report.coordinates == 0) {
        report.max_rel_error = err;
        report.worst_param = p;
        report.worst_index = i;
      }
      ++report.coordinates;
    }
    work[p] = original;
    report.numeric.emplace_back(original.shape(), std::move(numeric));
  }
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace ibvo
