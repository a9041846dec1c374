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


#include "hysp/diff_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Core>

#include "hysp/objectives.hpp"

namespace hysp::ad {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ", ";
    os << s[i];
  }
  os << ')';
  return os.str();
}

std::size_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str(shape_));
  }
}

const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kMatMul: return "matmul";
    case Op::kAdd: return "add";
    case Op::kMul: return "mul";
    case Op::kScale: return "scale";
    case Op::kRelu: return "relu";
    case Op::kTanh: return "tanh";
    case Op::kConcat: return "concat";
    case Op::kSum: return "sum";
    case Op::kMean: return "mean";
    case Op::kSumAll: return "sum_all";
    case Op::kReshape: return "reshape";
    case Op::kConvTime: return "conv_time";
    case Op::kGraphAggregate: return "graph_aggregate";
    case Op::kL2Norm: return "l2_norm";
    case Op::kNormalize: return "normalize";
    case Op::kExpMap0: return "exp_map0";
    case Op::kPoincareLoss: return "poincare_loss";
    case Op::kCosineLoss: return "cosine_loss";
    case Op::kSoftmaxXent: return "softmax_xent";
  }
  return "unknown";
}

const Tensor& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::leaf(Tensor value, bool requires_grad) {
  if (!geometry::all_finite(value.data())) throw NumericalError("leaf: non-finite value");
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Op op, std::vector<Var> inputs, Tensor value, BackwardFn backward) {
  if (!geometry::all_finite(value.data())) {
    throw NumericalError(std::string(op_name(op)) + ": non-finite output " + shape_str(value.shape()));
  }
  Node n;
  n.op = op;
  n.value = std::move(value);
  for (const Var& v : inputs) {
    if (&v.tape() != this) throw InvalidInput(std::string(op_name(op)) + ": input from another tape");
    n.inputs.push_back(v.id());
    n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::zero_grad() {
  for (Node& n : nodes_) {
    n.grad = Tensor();
    n.has_grad = false;
  }
}

Tensor Tape::grad(NodeId id) const {
  const Node& n = nodes_.at(id);
  if (n.has_grad) return n.grad;
  return Tensor(n.value.shape());
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw InvalidInput("backward: loss from another tape");
  Node& root = nodes_.at(loss.id());
  if (root.value.size() != 1) {
    throw InvalidInput("backward: loss must be scalar, got shape " + shape_str(root.value.shape()));
  }
  if (!root.requires_grad) return;
  if (!root.has_grad) {
    root.grad = Tensor(root.value.shape(), 0.0);
    root.has_grad = true;
  }
  root.grad[0] += 1.0;

  for (std::size_t k = loss.id() + 1; k-- > 0;) {
    Node& n = nodes_[k];
    if (!n.has_grad || !n.backward) continue;
    BackwardCtx ctx{n.value, n.grad, {}, {}};
    for (NodeId in : n.inputs) {
      Node& src = nodes_[in];
      ctx.in.push_back(&src.value);
      if (src.requires_grad) {
        if (!src.has_grad) {
          src.grad = Tensor(src.value.shape(), 0.0);
          src.has_grad = true;
        }
        ctx.in_grad.push_back(&src.grad);
      } else {
        ctx.in_grad.push_back(nullptr);
      }
    }
    n.backward(ctx);
  }
}

namespace {

void require_rank(const Var& x, std::size_t r, const char* op) {
  if (x.value().rank() != r) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(r) + ", got shape " +
                     shape_str(x.shape()));
  }
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

struct AxisSplit {
  std::size_t outer, len, inner;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
  AxisSplit a{1, s.at(axis), 1};
  for (std::size_t i = 0; i < axis; ++i) a.outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) a.inner *= s[i];
  return a;
}

Var reduce_axis(Var x, std::size_t axis, bool average) {
  const Shape& s = x.shape();
  if (axis >= s.size()) {
    throw ShapeError(std::string(average ? "mean" : "sum") + ": axis " + std::to_string(axis) +
                     " out of range for shape " + shape_str(s));
  }
  const AxisSplit sp = split_at(s, axis);
  Shape os = s;
  os.erase(os.begin() + static_cast<std::ptrdiff_t>(axis));
  Tensor out(os, 0.0);
  const auto& xv = x.value();
  const double k = average ? 1.0 / static_cast<double>(sp.len) : 1.0;
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t l = 0; l < sp.len; ++l) {
      const double* src = &xv.data()[(o * sp.len + l) * sp.inner];
      double* dst = &out.data()[o * sp.inner];
      for (std::size_t i = 0; i < sp.inner; ++i) dst[i] += src[i];
    }
  }
  if (average) {
    for (double& v : out.data()) v *= k;
  }
  return x.tape().record(average ? Op::kMean : Op::kSum, {x}, std::move(out), [sp, k](BackwardCtx& c) {
    Tensor& gx = *c.in_grad[0];
    for (std::size_t o = 0; o < sp.outer; ++o) {
      const double* g = &c.out_grad.data()[o * sp.inner];
      for (std::size_t l = 0; l < sp.len; ++l) {
        double* dst = &gx.data()[(o * sp.len + l) * sp.inner];
        for (std::size_t i = 0; i < sp.inner; ++i) dst[i] += k * g[i];
      }
    }
  });
}

}  // namespace

Var detach(Var x) { return x.tape().constant(x.value()); }

Var matmul(Var a, Var b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw ShapeError("matmul: shape mismatch " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  Tensor out({m, n}, 0.0);
  const auto A = a.value().data();
  const auto B = b.value().data();
  auto C = out.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      for (std::size_t j = 0; j < n; ++j) C[i * n + j] += aip * B[p * n + j];
    }
  }
  return a.tape().record(Op::kMatMul, {a, b}, std::move(out), [m, k, n](BackwardCtx& c) {
    const auto A = c.in[0]->data();
    const auto B = c.in[1]->data();
    const auto G = c.out_grad.data();
    if (c.in_grad[0]) {
      auto gA = c.in_grad[0]->data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += G[i * n + j] * B[p * n + j];
          gA[i * k + p] += s;
        }
    }
    if (c.in_grad[1]) {
      auto gB = c.in_grad[1]->data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gB[p * n + j] += aip * G[i * n + j];
        }
    }
  });
}

Var add(Var a, Var b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa == sb) {
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
    return a.tape().record(Op::kAdd, {a, b}, std::move(out), [](BackwardCtx& c) {
      for (int s = 0; s < 2; ++s) {
        if (!c.in_grad[s]) continue;
        auto g = c.in_grad[s]->data();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += c.out_grad[i];
      }
    });
  }
  if (sb.size() != 1 || sa.empty() || sa.back() != sb[0]) {
    throw ShapeError("add: shape mismatch " + shape_str(sa) + " vs " + shape_str(sb));
  }
  const std::size_t inner = sb[0];
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i % inner];
  return a.tape().record(Op::kAdd, {a, b}, std::move(out), [inner](BackwardCtx& c) {
    if (c.in_grad[0]) {
      auto g = c.in_grad[0]->data();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += c.out_grad[i];
    }
    if (c.in_grad[1]) {
      auto g = c.in_grad[1]->data();
      for (std::size_t i = 0; i < c.out_grad.size(); ++i) g[i % inner] += c.out_grad[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return a.tape().record(Op::kMul, {a, b}, std::move(out), [](BackwardCtx& c) {
    if (c.in_grad[0]) {
      auto g = c.in_grad[0]->data();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += c.out_grad[i] * (*c.in[1])[i];
    }
    if (c.in_grad[1]) {
      auto g = c.in_grad[1]->data();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += c.out_grad[i] * (*c.in[0])[i];
    }
  });
}

Var scale(Var x, double s) {
  Tensor out = x.value();
  for (double& v : out.data()) v *= s;
  return x.tape().record(Op::kScale, {x}, std::move(out), [s](BackwardCtx& c) {
    auto g = c.in_grad[0]->data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * c.out_grad[i];
  });
}

Var relu(Var x) {
  Tensor out = x.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return x.tape().record(Op::kRelu, {x}, std::move(out), [](BackwardCtx& c) {
    auto g = c.in_grad[0]->data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if ((*c.in[0])[i] > 0.0) g[i] += c.out_grad[i];
    }
  });
}

Var tanh(Var x) {
  Tensor out = x.value();
  for (double& v : out.data()) v = std::tanh(v);
  return x.tape().record(Op::kTanh, {x}, std::move(out), [](BackwardCtx& c) {
    auto g = c.in_grad[0]->data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double t = c.out[i];
      g[i] += (1.0 - t * t) * c.out_grad[i];
    }
  });
}

Var concat(const std::vector<Var>& xs, std::size_t axis) {
  if (xs.empty()) throw ShapeError("concat: no inputs");
  Shape os = xs[0].shape();
  if (axis >= os.size()) throw ShapeError("concat: axis out of range for shape " + shape_str(os));
  std::vector<std::size_t> lens;
  os[axis] = 0;
  for (const Var& x : xs) {
    Shape s = x.shape();
    if (s.size() != os.size()) {
      throw ShapeError("concat: rank mismatch " + shape_str(xs[0].shape()) + " vs " + shape_str(s));
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i != axis && s[i] != xs[0].shape()[i]) {
        throw ShapeError("concat: shape mismatch " + shape_str(xs[0].shape()) + " vs " + shape_str(s));
      }
    }
    lens.push_back(s[axis]);
    os[axis] += s[axis];
  }
  const AxisSplit sp = split_at(os, axis);
  Tensor out(os, 0.0);
  std::size_t offset = 0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const auto src = xs[j].value().data();
    const std::size_t block = lens[j] * sp.inner;
    for (std::size_t o = 0; o < sp.outer; ++o) {
      std::copy_n(&src[o * block], block, &out.data()[o * sp.len * sp.inner + offset * sp.inner]);
    }
    offset += lens[j];
  }
  return xs[0].tape().record(Op::kConcat, xs, std::move(out), [sp, lens](BackwardCtx& c) {
    std::size_t offset = 0;
    for (std::size_t j = 0; j < lens.size(); ++j) {
      const std::size_t block = lens[j] * sp.inner;
      if (c.in_grad[j]) {
        auto g = c.in_grad[j]->data();
        for (std::size_t o = 0; o < sp.outer; ++o) {
          const double* src = &c.out_grad.data()[o * sp.len * sp.inner + offset * sp.inner];
          for (std::size_t i = 0; i < block; ++i) g[o * block + i] += src[i];
        }
      }
      offset += lens[j];
    }
  });
}

Var sum(Var x, std::size_t axis) { return reduce_axis(x, axis, false); }
Var mean(Var x, std::size_t axis) { return reduce_axis(x, axis, true); }

Var sum_all(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return x.tape().record(Op::kSumAll, {x}, Tensor({}, s), [](BackwardCtx& c) {
    const double g0 = c.out_grad[0];
    for (double& g : c.in_grad[0]->data()) g += g0;
  });
}

Var reshape(Var x, Shape shape) {
  if (shape_size(shape) != x.value().size()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  Tensor out(std::move(shape), x.value().vec());
  return x.tape().record(Op::kReshape, {x}, std::move(out), [](BackwardCtx& c) {
    auto g = c.in_grad[0]->data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += c.out_grad[i];
  });
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using CMatMap = Eigen::Map<const RowMat>;

// Row (c, k) of the im2col matrix holds channel c shifted by k - K/2 frames,
// zero-padded at both ends. Shape (C*K, T*V).
void im2col(const double* x, std::size_t C, std::size_t T, std::size_t V, std::size_t K, double* col) {
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(K / 2);
  const std::size_t plane = T * V;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < K; ++k) {
      double* dst = col + (c * K + k) * plane;
      const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(k) - pad;
      for (std::size_t t = 0; t < T; ++t) {
        const std::ptrdiff_t src_t = static_cast<std::ptrdiff_t>(t) + s;
        if (src_t < 0 || src_t >= static_cast<std::ptrdiff_t>(T)) {
          std::fill_n(dst + t * V, V, 0.0);
        } else {
          std::copy_n(x + (c * T + static_cast<std::size_t>(src_t)) * V, V, dst + t * V);
        }
      }
    }
  }
}

void col2im_add(const double* col, std::size_t C, std::size_t T, std::size_t V, std::size_t K, double* gx) {
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(K / 2);
  const std::size_t plane = T * V;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < K; ++k) {
      const double* src = col + (c * K + k) * plane;
      const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(k) - pad;
      for (std::size_t t = 0; t < T; ++t) {
        const std::ptrdiff_t dst_t = static_cast<std::ptrdiff_t>(t) + s;
        if (dst_t < 0 || dst_t >= static_cast<std::ptrdiff_t>(T)) continue;
        double* dst = gx + (c * T + static_cast<std::size_t>(dst_t)) * V;
        for (std::size_t v = 0; v < V; ++v) dst[v] += src[t * V + v];
      }
    }
  }
}

/// im2col for the whole batch: (C*K, N*T*V), sample n in column block n.
std::vector<double> batch_columns(const double* X, std::size_t N, std::size_t C, std::size_t T, std::size_t V,
                                  std::size_t K) {
  const std::size_t plane = T * V, ck = C * K, width = N * plane;
  std::vector<double> cols(ck * width);
  std::vector<double> one(ck * plane);
  for (std::size_t n = 0; n < N; ++n) {
    im2col(X + n * C * plane, C, T, V, K, one.data());
    for (std::size_t r = 0; r < ck; ++r) std::copy_n(&one[r * plane], plane, &cols[r * width + n * plane]);
  }
  return cols;
}

}  // namespace

Var conv_time(Var x, Var weight, Var bias) {
  require_rank(x, 4, "conv_time");
  require_rank(weight, 3, "conv_time");
  require_rank(bias, 1, "conv_time");
  const std::size_t N = x.shape()[0], C = x.shape()[1], T = x.shape()[2], V = x.shape()[3];
  const std::size_t O = weight.shape()[0], K = weight.shape()[2];
  if (weight.shape()[1] != C || bias.shape()[0] != O || K % 2 == 0) {
    throw ShapeError("conv_time: shape mismatch input " + shape_str(x.shape()) + " weight " +
                     shape_str(weight.shape()) + " bias " + shape_str(bias.shape()));
  }
  const std::size_t plane = T * V, ck = C * K, width = N * plane;
  const auto Bv = bias.value().data();

  // Yt (O, N*TV) = W (O, CK) * cols (CK, N*TV), then scattered to (N, O, T, V).
  const std::vector<double> cols = batch_columns(x.value().data().data(), N, C, T, V, K);
  std::vector<double> yt(O * width);
  {
    MatMap Y(yt.data(), O, width);
    Y.noalias() = CMatMap(weight.value().data().data(), O, ck) * CMatMap(cols.data(), ck, width);
    for (std::size_t o = 0; o < O; ++o) Y.row(o).array() += Bv[o];
  }
  Tensor out({N, O, T, V}, 0.0);
  double* Y = out.data().data();
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t o = 0; o < O; ++o) std::copy_n(&yt[o * width + n * plane], plane, Y + (n * O + o) * plane);

  return x.tape().record(Op::kConvTime, {x, weight, bias}, std::move(out), [N, C, T, V, O, K, plane, ck, width](BackwardCtx& ctx) {
    const double* G = ctx.out_grad.data().data();
    Tensor* gx = ctx.in_grad[0];
    Tensor* gw = ctx.in_grad[1];
    Tensor* gb = ctx.in_grad[2];
    // Gt (O, N*TV).
    std::vector<double> gt(O * width);
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t o = 0; o < O; ++o) std::copy_n(G + (n * O + o) * plane, plane, &gt[o * width + n * plane]);
    if (gb) {
      for (std::size_t o = 0; o < O; ++o) {
        double s = 0.0;
        for (std::size_t i = 0; i < width; ++i) s += gt[o * width + i];
        (*gb)[o] += s;
      }
    }
    if (gw) {
      const std::vector<double> cols = batch_columns(ctx.in[0]->data().data(), N, C, T, V, K);
      MatMap(gw->data().data(), O, ck).noalias() +=
          CMatMap(gt.data(), O, width) * CMatMap(cols.data(), ck, width).transpose();
    }
    if (gx) {
      std::vector<double> gcols(ck * width);
      MatMap(gcols.data(), ck, width).noalias() =
          CMatMap(ctx.in[1]->data().data(), O, ck).transpose() * CMatMap(gt.data(), O, width);
      std::vector<double> one(ck * plane);
      for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t r = 0; r < ck; ++r) std::copy_n(&gcols[r * width + n * plane], plane, &one[r * plane]);
        col2im_add(one.data(), C, T, V, K, gx->data().data() + n * C * plane);
      }
    }
  });
}

Var graph_aggregate(Var x, Var adj) {
  require_rank(x, 4, "graph_aggregate");
  require_rank(adj, 2, "graph_aggregate");
  const std::size_t V = x.shape()[3];
  if (adj.shape()[0] != V || adj.shape()[1] != V) {
    throw ShapeError("graph_aggregate: joint count mismatch input " + shape_str(x.shape()) +
                     " adjacency " + shape_str(adj.shape()));
  }
  const std::size_t rows = x.value().size() / V;
  Tensor out(x.shape(), 0.0);
  const auto X = x.value().data();
  const auto A = adj.value().data();
  auto Y = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = &X[r * V];
    double* yr = &Y[r * V];
    for (std::size_t v = 0; v < V; ++v) {
      const double xv = xr[v];
      if (xv == 0.0) continue;
      for (std::size_t w = 0; w < V; ++w) yr[w] += xv * A[v * V + w];
    }
  }
  return x.tape().record(Op::kGraphAggregate, {x, adj}, std::move(out), [rows, V](BackwardCtx& c) {
    const auto X = c.in[0]->data();
    const auto A = c.in[1]->data();
    const auto G = c.out_grad.data();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* gr = &G[r * V];
      if (c.in_grad[0]) {
        double* gx = &c.in_grad[0]->data()[r * V];
        for (std::size_t v = 0; v < V; ++v) {
          double s = 0.0;
          for (std::size_t w = 0; w < V; ++w) s += gr[w] * A[v * V + w];
          gx[v] += s;
        }
      }
      if (c.in_grad[1]) {
        auto gA = c.in_grad[1]->data();
        const double* xr = &X[r * V];
        for (std::size_t v = 0; v < V; ++v)
          for (std::size_t w = 0; w < V; ++w) gA[v * V + w] += xr[v] * gr[w];
      }
    }
  });
}

Var l2_norm(Var x) {
  require_rank(x, 2, "l2_norm");
  const std::size_t N = x.shape()[0], D = x.shape()[1];
  Tensor out({N}, 0.0);
  for (std::size_t n = 0; n < N; ++n) out[n] = geometry::norm(x.value().data().subspan(n * D, D));
  return x.tape().record(Op::kL2Norm, {x}, std::move(out), [N, D](BackwardCtx& c) {
    auto g = c.in_grad[0]->data();
    for (std::size_t n = 0; n < N; ++n) {
      const double r = c.out[n];
      if (r == 0.0) continue;
      for (std::size_t d = 0; d < D; ++d) g[n * D + d] += c.out_grad[n] * (*c.in[0])[n * D + d] / r;
    }
  });
}

Var normalize(Var x) {
  require_rank(x, 2, "normalize");
  const std::size_t N = x.shape()[0], D = x.shape()[1];
  Tensor out = x.value();
  std::vector<double> norms(N);
  for (std::size_t n = 0; n < N; ++n) {
    norms[n] = geometry::norm(x.value().data().subspan(n * D, D));
    if (norms[n] == 0.0) throw InvalidInput("normalize: zero-norm row " + std::to_string(n));
    for (std::size_t d = 0; d < D; ++d) out[n * D + d] /= norms[n];
  }
  return x.tape().record(Op::kNormalize, {x}, std::move(out), [N, D, norms](BackwardCtx& c) {
    auto g = c.in_grad[0]->data();
    for (std::size_t n = 0; n < N; ++n) {
      const auto y = c.out.data().subspan(n * D, D);
      const auto gy = c.out_grad.data().subspan(n * D, D);
      const double yg = geometry::dot(y, gy);
      for (std::size_t d = 0; d < D; ++d) g[n * D + d] += (gy[d] - y[d] * yg) / norms[n];
    }
  });
}

Var exp_map0(Var x, geometry::Curvature curv) {
  require_rank(x, 2, "exp_map0");
  const std::size_t N = x.shape()[0], D = x.shape()[1];
  Tensor out(x.shape(), 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    const auto h = geometry::exp_map0(x.value().data().subspan(n * D, D), curv);
    std::copy(h.vec().begin(), h.vec().end(), out.data().begin() + static_cast<std::ptrdiff_t>(n * D));
  }
  return x.tape().record(Op::kExpMap0, {x}, std::move(out), [N, D, curv](BackwardCtx& c) {
    const double sc = curv.sqrt_c();
    const double max_norm = (1.0 - geometry::kBallEps) / sc;
    auto g = c.in_grad[0]->data();
    for (std::size_t n = 0; n < N; ++n) {
      const auto z = c.in[0]->data().subspan(n * D, D);
      const auto gy = c.out_grad.data().subspan(n * D, D);
      const double r = geometry::norm(z);
      const double s = sc * r;
      if (s == 0.0) {
        // Jacobian limit at the origin is the identity.
        for (std::size_t d = 0; d < D; ++d) g[n * D + d] += gy[d];
        continue;
      }
      const double th = std::tanh(s);
      // Mirror the forward projection decision exactly.
      double unproj2 = 0.0;
      for (std::size_t d = 0; d < D; ++d) {
        const double v = z[d] * (th / s);
        unproj2 += v * v;
      }
      const bool clamped = std::sqrt(unproj2) > max_norm;
      const double tangential = clamped ? max_norm / r : th / s;
      const double radial = clamped ? 0.0 : 1.0 - th * th;
      double zg = 0.0;
      for (std::size_t d = 0; d < D; ++d) zg += z[d] * gy[d];
      const double proj = zg / (r * r);
      for (std::size_t d = 0; d < D; ++d) {
        const double along = proj * z[d];
        g[n * D + d] += tangential * (gy[d] - along) + radial * along;
      }
    }
  });
}

Var poincare_loss(Var h, Var h_hat, geometry::Curvature curv) {
  require_rank(h, 2, "poincare_loss");
  require_same_shape(h, h_hat, "poincare_loss");
  const std::size_t N = h.shape()[0], D = h.shape()[1];
  Tensor out({N}, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    out[n] = geometry::poincare_distance(h.value().data().subspan(n * D, D),
                                         h_hat.value().data().subspan(n * D, D), curv);
  }
  return h.tape().record(Op::kPoincareLoss, {h, h_hat}, std::move(out), [N, D, curv](BackwardCtx& c) {
    const double cv = curv.value();
    for (std::size_t n = 0; n < N; ++n) {
      const auto x = c.in[0]->data().subspan(n * D, D);
      const auto y = c.in[1]->data().subspan(n * D, D);
      double d2 = 0.0;
      for (std::size_t i = 0; i < D; ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
      const double a = 1.0 - cv * geometry::squared_norm(x);
      const double b = 1.0 - cv * geometry::squared_norm(y);
      const double u = 1.0 + 2.0 * cv * d2 / (a * b);
      if (u <= geometry::kAcoshFloor) continue;  // at the minimum; zero subgradient
      const double dl_du = c.out_grad[n] / (std::sqrt(cv) * std::sqrt(u * u - 1.0));
      const double k = dl_du * 4.0 * cv / (a * b);
      if (c.in_grad[0]) {
        auto g = c.in_grad[0]->data().subspan(n * D, D);
        for (std::size_t i = 0; i < D; ++i) g[i] += k * ((x[i] - y[i]) + cv * d2 * x[i] / a);
      }
      if (c.in_grad[1]) {
        auto g = c.in_grad[1]->data().subspan(n * D, D);
        for (std::size_t i = 0; i < D; ++i) g[i] += k * ((y[i] - x[i]) + cv * d2 * y[i] / b);
      }
    }
  });
}

Var cosine_loss(Var h, Var h_hat) {
  require_rank(h, 2, "cosine_loss");
  require_same_shape(h, h_hat, "cosine_loss");
  const std::size_t N = h.shape()[0], D = h.shape()[1];
  Tensor out({N}, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    out[n] = objectives::cosine_loss(h.value().data().subspan(n * D, D),
                                     h_hat.value().data().subspan(n * D, D));
  }
  return h.tape().record(Op::kCosineLoss, {h, h_hat}, std::move(out), [N, D](BackwardCtx& c) {
    for (std::size_t n = 0; n < N; ++n) {
      const auto x = c.in[0]->data().subspan(n * D, D);
      const auto y = c.in[1]->data().subspan(n * D, D);
      const double nx = geometry::norm(x), ny = geometry::norm(y);
      const double cosv = geometry::dot(x, y) / (nx * ny);
      const double go = c.out_grad[n];
      // d(1 - cos)/dx = -(y/(|x||y|) - cos x/|x|^2)
      if (c.in_grad[0]) {
        auto g = c.in_grad[0]->data().subspan(n * D, D);
        for (std::size_t i = 0; i < D; ++i) g[i] -= go * (y[i] / (nx * ny) - cosv * x[i] / (nx * nx));
      }
      if (c.in_grad[1]) {
        auto g = c.in_grad[1]->data().subspan(n * D, D);
        for (std::size_t i = 0; i < D; ++i) g[i] -= go * (x[i] / (nx * ny) - cosv * y[i] / (ny * ny));
      }
    }
  });
}

Var softmax_xent(Var logits, std::span<const int> labels) {
  require_rank(logits, 2, "softmax_xent");
  const std::size_t N = logits.shape()[0], K = logits.shape()[1];
  if (labels.size() != N) {
    throw ShapeError("softmax_xent: " + std::to_string(labels.size()) + " labels for logits " +
                     shape_str(logits.shape()));
  }
  std::vector<double> probs(N * K);
  std::vector<int> lab(labels.begin(), labels.end());
  double total = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    if (lab[n] < 0 || static_cast<std::size_t>(lab[n]) >= K) {
      throw InvalidInput("softmax_xent: label out of range");
    }
    const auto row = logits.value().data().subspan(n * K, K);
    const double m = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      probs[n * K + k] = std::exp(row[k] - m);
      s += probs[n * K + k];
    }
    for (std::size_t k = 0; k < K; ++k) probs[n * K + k] /= s;
    total += m + std::log(s) - row[static_cast<std::size_t>(lab[n])];
  }
  Tensor out({}, total / static_cast<double>(N));
  return logits.tape().record(Op::kSoftmaxXent, {logits}, std::move(out),
                              [N, K, probs = std::move(probs), lab = std::move(lab)](BackwardCtx& c) {
                                auto g = c.in_grad[0]->data();
                                const double k = c.out_grad[0] / static_cast<double>(N);
                                for (std::size_t n = 0; n < N; ++n)
                                  for (std::size_t j = 0; j < K; ++j) {
                                    const double y = static_cast<int>(j) == lab[n] ? 1.0 : 0.0;
                                    g[n * K + j] += k * (probs[n * K + j] - y);
                                  }
                              });
}

Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x,
                                  double step) {
  Tensor grad(x.shape(), 0.0);
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double fp = f(probe);
    probe[i] = orig - step;
    const double fm = f(probe);
    probe[i] = orig;
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

double relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += (a[i] - b[i]) * (a[i] - b[i]);
  const double denom = std::max({geometry::norm(a), geometry::norm(b), floor});
  return std::sqrt(diff) / denom;
}

}  // namespace hysp::ad
