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


#include "hysp/gradcheck.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "hysp/diff_engine.hpp"
#include "hysp/geometry.hpp"

namespace hysp::gradcheck {

namespace {

using ad::Shape;
using ad::Tape;
using ad::Tensor;
using ad::Var;

constexpr double kFdStep = 1e-6;

struct Input {
  Tensor value;
  bool differentiable = true;
};

using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;

struct Case {
  std::string name;
  std::function<std::vector<Input>(std::mt19937_64&)> make_inputs;
  Builder build;
};

Tensor uniform(std::mt19937_64& rng, Shape shape, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = u(rng);
  return t;
}

// Values bounded away from zero so finite differences never straddle a ReLU kink.
Tensor away_from_zero(std::mt19937_64& rng, Shape shape) {
  Tensor t = uniform(rng, std::move(shape), 0.1, 1.0);
  std::bernoulli_distribution flip(0.5);
  for (double& v : t.data()) {
    if (flip(rng)) v = -v;
  }
  return t;
}

// Rows with norms uniform in [lo, hi].
Tensor ball_rows(std::mt19937_64& rng, std::size_t n, std::size_t d, double lo, double hi) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> r(lo, hi);
  Tensor t({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    auto row = t.data().subspan(i * d, d);
    for (double& v : row) v = g(rng);
    const double s = r(rng) / geometry::norm(row);
    for (double& v : row) v *= s;
  }
  return t;
}

// Scalar loss sum(out * weights) with fixed random weights, so every output
// coordinate contributes.
double scalar_loss(const Case& c, const std::vector<Input>& inputs, const Tensor& weights,
                   std::vector<Tensor>* grads) {
  Tape tape;
  std::vector<Var> vars;
  for (const Input& in : inputs) vars.push_back(tape.leaf(in.value, grads != nullptr && in.differentiable));
  Var out = c.build(tape, vars);
  Var loss = ad::sum_all(ad::mul(out, tape.constant(weights)));
  if (grads) {
    tape.backward(loss);
    grads->clear();
    for (const Var& v : vars) grads->push_back(tape.grad(v.id()));
  }
  return loss.value()[0];
}

const geometry::Curvature kUnit{1.0};
const geometry::Curvature kHalf{0.5};

std::vector<Case> cases() {
  std::vector<Case> cs;
  cs.push_back({"matmul",
                [](auto& r) { return std::vector<Input>{{uniform(r, {3, 4}, -1, 1)}, {uniform(r, {4, 2}, -1, 1)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::matmul(v[0], v[1]); }});
  cs.push_back({"add",
                [](auto& r) { return std::vector<Input>{{uniform(r, {2, 3}, -1, 1)}, {uniform(r, {2, 3}, -1, 1)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::add(v[0], v[1]); }});
  cs.push_back({"add_bias",
                [](auto& r) { return std::vector<Input>{{uniform(r, {4, 3}, -1, 1)}, {uniform(r, {3}, -1, 1)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::add(v[0], v[1]); }});
  cs.push_back({"mul",
                [](auto& r) { return std::vector<Input>{{uniform(r, {2, 3}, -1, 1)}, {uniform(r, {2, 3}, -1, 1)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::mul(v[0], v[1]); }});
  cs.push_back({"scale", [](auto& r) { return std::vector<Input>{{uniform(r, {2, 3}, -1, 1)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::scale(v[0], -1.7); }});
  cs.push_back({"relu", [](auto& r) { return std::vector<Input>{{away_from_zero(r, {3, 4})}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::relu(v[0]); }});
  cs.push_back({"tanh", [](auto& r) { return std::vector<Input>{{uniform(r, {3, 4}, -2, 2)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::tanh(v[0]); }});
  cs.push_back({"concat",
                [](auto& r) { return std::vector<Input>{{uniform(r, {2, 3}, -1, 1)}, {uniform(r, {2, 2}, -1, 1)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::concat({v[0], v[1]}, 1); }});
  cs.push_back({"sum", [](auto& r) { return std::vector<Input>{{uniform(r, {2, 3, 4}, -1, 1)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::sum(v[0], 1); }});
  cs.push_back({"mean", [](auto& r) { return std::vector<Input>{{uniform(r, {2, 3, 4}, -1, 1)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::mean(v[0], 2); }});
  cs.push_back({"reshape", [](auto& r) { return std::vector<Input>{{uniform(r, {2, 6}, -1, 1)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::reshape(v[0], {3, 4}); }});
  cs.push_back({"conv_time",
                [](auto& r) {
                  return std::vector<Input>{{uniform(r, {2, 3, 5, 4}, -1, 1)},
                                            {uniform(r, {2, 3, 3}, -1, 1)},
                                            {uniform(r, {2}, -1, 1)}};
                },
                [](Tape&, const std::vector<Var>& v) { return ad::conv_time(v[0], v[1], v[2]); }});
  cs.push_back({"graph_aggregate",
                [](auto& r) {
                  return std::vector<Input>{{uniform(r, {2, 2, 3, 4}, -1, 1)}, {uniform(r, {4, 4}, 0, 1)}};
                },
                [](Tape&, const std::vector<Var>& v) { return ad::graph_aggregate(v[0], v[1]); }});
  cs.push_back({"l2_norm", [](auto& r) { return std::vector<Input>{{ball_rows(r, 3, 4, 0.2, 2.0)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::l2_norm(v[0]); }});
  cs.push_back({"normalize", [](auto& r) { return std::vector<Input>{{ball_rows(r, 3, 4, 0.2, 2.0)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::normalize(v[0]); }});
  cs.push_back({"exp_map0", [](auto& r) { return std::vector<Input>{{ball_rows(r, 3, 4, 0.05, 3.0)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::exp_map0(v[0], kUnit); }});
  cs.push_back({"exp_map0_c0.5", [](auto& r) { return std::vector<Input>{{ball_rows(r, 3, 4, 0.05, 3.0)}}; },
                [](Tape&, const std::vector<Var>& v) { return ad::exp_map0(v[0], kHalf); }});
  cs.push_back({"poincare_loss",
                [](auto& r) {
                  return std::vector<Input>{{ball_rows(r, 3, 4, 0.05, 0.9)}, {ball_rows(r, 3, 4, 0.05, 0.9)}};
                },
                [](Tape&, const std::vector<Var>& v) { return ad::poincare_loss(v[0], v[1], kUnit); }});
  cs.push_back({"cosine_loss",
                [](auto& r) {
                  return std::vector<Input>{{ball_rows(r, 3, 4, 0.2, 2.0)}, {ball_rows(r, 3, 4, 0.2, 2.0)}};
                },
                [](Tape&, const std::vector<Var>& v) { return ad::cosine_loss(v[0], v[1]); }});
  cs.push_back({"softmax_xent", [](auto& r) { return std::vector<Input>{{uniform(r, {4, 3}, -2, 2)}}; },
                [](Tape&, const std::vector<Var>& v) {
                  static const std::vector<int> labels{0, 2, 1, 2};
                  return ad::softmax_xent(v[0], labels);
                }});
  // Online prediction p against a stop-gradient target through the hyperbolic
  // map, mixing both objective terms.
  cs.push_back({"hysp_composite",
                [](auto& r) {
                  return std::vector<Input>{{ball_rows(r, 4, 5, 0.1, 2.5)}, {ball_rows(r, 4, 5, 0.1, 2.5), false}};
                },
                [](Tape& t, const std::vector<Var>& v) {
                  Var h = ad::exp_map0(v[0], kUnit);
                  Var h_hat = ad::detach(ad::exp_map0(v[1], kUnit));
                  Var poin = ad::mean(ad::poincare_loss(h, h_hat, kUnit), 0);
                  Var cosv = ad::mean(ad::cosine_loss(h, h_hat), 0);
                  (void)t;
                  return ad::add(ad::scale(poin, 0.3), ad::scale(cosv, 0.7));
                }});
  // InfoNCE over normalized embeddings with a fixed negative bank.
  cs.push_back({"infonce_composite",
                [](auto& r) {
                  return std::vector<Input>{{ball_rows(r, 3, 4, 0.5, 2.0)},
                                            {ball_rows(r, 3, 4, 0.5, 2.0), false},
                                            {ball_rows(r, 4, 5, 1.0, 1.0), false}};
                },
                [](Tape&, const std::vector<Var>& v) {
                  Var q = ad::normalize(v[0]);
                  Var k = ad::normalize(v[1]);
                  Var pos = ad::reshape(ad::sum(ad::mul(q, k), 1), {3, 1});
                  Var neg = ad::matmul(q, v[2]);
                  static const std::vector<int> labels{0, 0, 0};
                  return ad::softmax_xent(ad::scale(ad::concat({pos, neg}, 1), 1.0 / 0.07), labels);
                }});
  return cs;
}

}  // namespace

std::vector<CheckRow> run_primitive_suite(int n_seeds, double tol) {
  std::vector<CheckRow> rows;
  for (const Case& c : cases()) {
    CheckRow row{c.name, 0.0, n_seeds, true};
    for (int seed = 0; seed < n_seeds; ++seed) {
      std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 7919 + 17);
      std::vector<Input> inputs = c.make_inputs(rng);
      Tensor weights;
      {
        Tape probe;
        std::vector<Var> vars;
        for (const Input& in : inputs) vars.push_back(probe.constant(in.value));
        weights = uniform(rng, c.build(probe, vars).shape(), -1, 1);
      }
      std::vector<Tensor> analytic;
      scalar_loss(c, inputs, weights, &analytic);
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!inputs[i].differentiable) continue;
        auto f = [&](const Tensor& x) {
          std::vector<Input> shifted = inputs;
          shifted[i].value = x;
          return scalar_loss(c, shifted, weights, nullptr);
        };
        const Tensor numeric = ad::finite_difference_gradient(f, inputs[i].value, kFdStep);
        row.max_rel_error =
            std::max(row.max_rel_error, ad::relative_error(analytic[i].data(), numeric.data(), 1e-8));
      }
    }
    row.pass = row.max_rel_error < tol;
    rows.push_back(row);
  }
  return rows;
}

RiemannianOracleResult run_riemannian_oracle(int pairs, const std::vector<int>& dims, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(seed);
  RiemannianOracleResult res;
  const geometry::Curvature c{1.0};
  for (int p = 0; p < pairs; ++p) {
    const auto d = static_cast<std::size_t>(dims[static_cast<std::size_t>(p) % dims.size()]);
    Tensor pts;
    do {
      pts = ball_rows(rng, 2, d, 0.05, 0.95);
    } while (ad::relative_error(pts.data().subspan(0, d), pts.data().subspan(d, d)) < 1e-2);
    const geometry::PoincarePoint h(std::vector<double>(pts.vec().begin(), pts.vec().begin() + d), c);
    const geometry::PoincarePoint g(std::vector<double>(pts.vec().begin() + d, pts.vec().end()), c);
    const auto closed = geometry::riemannian_grad_poincare(h, g);
    auto f = [&](const Tensor& x) { return geometry::poincare_distance(x.data(), g.coords(), c); };
    Tensor numeric = ad::finite_difference_gradient(f, Tensor({d}, h.vec()), kFdStep);
    const double factor = geometry::conformal_factor(h.coords(), c);
    for (double& v : numeric.data()) v *= factor;
    res.max_rel_error = std::max(res.max_rel_error, ad::relative_error(closed.vec, numeric.data()));
    ++res.pairs;
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace hysp::gradcheck
