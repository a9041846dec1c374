// Copyright 2026 The HYSP Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hysp/errors.hpp"
#include "hysp/geometry.hpp"

// A small reverse-mode differentiation engine over the closed set of
// primitives the twin model and its losses need.
namespace hysp::ad {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);
std::size_t shape_size(const Shape& s);

/// Dense row-major double tensor.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& vec() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

enum class Op : std::uint8_t {
  kLeaf,
  kMatMul,
  kAdd,
  kMul,
  kScale,
  kRelu,
  kTanh,
  kConcat,
  kSum,
  kMean,
  kSumAll,
  kReshape,
  kConvTime,
  kGraphAggregate,
  kL2Norm,
  kNormalize,
  kExpMap0,
  kPoincareLoss,
  kCosineLoss,
  kSoftmaxXent,
};

const char* op_name(Op op);

using NodeId = std::size_t;
class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, NodeId id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  NodeId id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  NodeId id_ = 0;
};

struct BackwardCtx {
  const Tensor& out;
  const Tensor& out_grad;
  std::vector<const Tensor*> in;
  /// nullptr for inputs that do not require a gradient.
  std::vector<Tensor*> in_grad;
};

using BackwardFn = std::function<void(BackwardCtx&)>;

/// Ordered record of primitive applications. One tape per step, confined to
/// a single thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  /// Appends a node. backward is dropped when no input requires a gradient.
  Var record(Op op, std::vector<Var> inputs, Tensor value, BackwardFn backward);

  /// Reverse sweep from a scalar node. Gradients accumulate; call
  /// zero_grad() between sweeps over the same tape.
  void backward(Var loss);
  void zero_grad();

  const Tensor& value(NodeId id) const { return nodes_.at(id).value; }
  /// Gradient of a node after backward(); a zero tensor when none reached it.
  Tensor grad(NodeId id) const;
  bool requires_grad(NodeId id) const { return nodes_.at(id).requires_grad; }
  Op op(NodeId id) const { return nodes_.at(id).op; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Op op = Op::kLeaf;
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::vector<NodeId> inputs;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// ---- primitives -----------------------------------------------------------

Var detach(Var x);

Var matmul(Var a, Var b);
/// Same-shape add, or add of a 1-D tensor broadcast over the last axis.
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double s);
Var relu(Var x);
Var tanh(Var x);
Var concat(const std::vector<Var>& xs, std::size_t axis);
Var sum(Var x, std::size_t axis);
Var mean(Var x, std::size_t axis);
Var sum_all(Var x);
/// Same data, new shape of equal size.
Var reshape(Var x, Shape shape);
/// Same-padded 1-D convolution over the T axis of an (N, C, T, V) tensor with
/// weights (O, C, K) and bias (O); K must be odd.
Var conv_time(Var x, Var weight, Var bias);
/// out[n,c,t,w] = sum_v x[n,c,t,v] * adj[v,w] for x (N, C, T, V), adj (V, V).
Var graph_aggregate(Var x, Var adj);
/// Row norms of an (N, D) tensor -> (N).
Var l2_norm(Var x);
/// Row-wise unit normalization of an (N, D) tensor.
Var normalize(Var x);
/// Row-wise exponential map at the origin, including the ball projection.
Var exp_map0(Var x, geometry::Curvature c);
/// Row-wise Poincare distance of two (N, D) tensors -> (N).
Var poincare_loss(Var h, Var h_hat, geometry::Curvature c);
/// Row-wise 1 - cos of two (N, D) tensors -> (N).
Var cosine_loss(Var h, Var h_hat);
/// Mean softmax cross-entropy of (N, K) logits against integer labels -> scalar.
Var softmax_xent(Var logits, std::span<const int> labels);

// ---- validation -----------------------------------------------------------

/// Central differences (f(x + d e_i) - f(x - d e_i)) / 2d per coordinate.
Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x,
                                  double step);

/// ||a - b|| / max(||a||, ||b||, floor).
double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-12);

}  // namespace hysp::ad
