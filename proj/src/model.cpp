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


#include "hysp/model.hpp"

#include <cmath>
#include <cstring>

#include "binio.hpp"
#include "hysp/errors.hpp"
#include "hysp/rng.hpp"

namespace hysp::model {

namespace {

std::string block_name(std::size_t b, const char* leaf) { return "block" + std::to_string(b) + "." + leaf; }

void add_uniform(ParamSet& ps, const std::string& name, ad::Shape shape, std::size_t fan_in, double scale,
                 CounterRng& rng) {
  ad::Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : t.data()) v = scale * rng.uniform(-bound, bound);
  ps.add(name, std::move(t));
}

void add_head(ParamSet& ps, const std::string& prefix, std::size_t dim, double out_scale, CounterRng& rng) {
  add_uniform(ps, prefix + "fc1.w", {dim, dim}, dim, 1.0, rng);
  add_uniform(ps, prefix + "fc1.b", {dim}, dim, 1.0, rng);
  add_uniform(ps, prefix + "fc2.w", {dim, dim}, dim, out_scale, rng);
  add_uniform(ps, prefix + "fc2.b", {dim}, dim, 1.0, rng);
}

}  // namespace

void ModelConfig::validate() const {
  if (joints == 0 || in_channels == 0 || hidden == 0 || dim == 0 || blocks == 0)
    throw InvalidInput("model config: sizes must be positive");
  if (kernel % 2 == 0) throw InvalidInput("model config: temporal kernel must be odd");
  if (!(ema_coefficient >= 0.0 && ema_coefficient <= 1.0))
    throw InvalidInput("model config: ema_coefficient must be in [0, 1]");
  if (!(boundary_init_scale > 0.0) || !std::isfinite(boundary_init_scale))
    throw InvalidInput("model config: boundary_init_scale must be positive");
}

void ParamSet::add(std::string name, ad::Tensor value) {
  if (contains(name)) throw InvalidInput("duplicate parameter " + name);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
}

bool ParamSet::contains(const std::string& name) const {
  for (const auto& n : names_)
    if (n == name) return true;
  return false;
}

std::size_t ParamSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  throw InvalidInput("unknown parameter " + name);
}

const ad::Tensor& ParamSet::get(const std::string& name) const { return values_[index_of(name)]; }
ad::Tensor& ParamSet::get(const std::string& name) { return values_[index_of(name)]; }

std::size_t ParamSet::element_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

std::uint64_t ParamSet::hash() const {
  std::uint64_t h = detail::fnv1a(nullptr, 0);
  for (std::size_t i = 0; i < names_.size(); ++i) {
    h = detail::fnv1a(names_[i].data(), names_[i].size(), h);
    for (std::size_t d : values_[i].shape()) {
      const auto d64 = static_cast<std::uint64_t>(d);
      h = detail::fnv1a(&d64, sizeof d64, h);
    }
    h = detail::fnv1a(values_[i].vec().data(), values_[i].size() * sizeof(double), h);
  }
  return h;
}

BoundParams bind(ad::Tape& tape, const ParamSet& params, bool requires_grad) {
  BoundParams b{&params, {}};
  b.vars.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) b.vars.push_back(tape.leaf(params[i], requires_grad));
  return b;
}

TwinModel init_twin(const ModelConfig& cfg, const SkeletonGraph& graph, std::uint64_t seed) {
  cfg.validate();
  if (graph.num_joints != cfg.joints) throw ShapeError("init_twin: graph joint count differs from config");
  CounterRng rng(seed, 0, 0, StreamPurpose::kInit);
  ParamSet online;
  for (std::size_t b = 0; b < cfg.blocks; ++b) {
    const std::size_t in = b == 0 ? cfg.in_channels : cfg.hidden;
    const std::size_t out = b + 1 == cfg.blocks ? cfg.dim : cfg.hidden;
    add_uniform(online, "encoder." + block_name(b, "mix.w"), {out, in, 1}, in, 1.0, rng);
    add_uniform(online, "encoder." + block_name(b, "mix.b"), {out}, in, 1.0, rng);
    add_uniform(online, "encoder." + block_name(b, "tconv.w"), {out, out, cfg.kernel}, out * cfg.kernel, 1.0, rng);
    add_uniform(online, "encoder." + block_name(b, "tconv.b"), {out}, out * cfg.kernel, 1.0, rng);
  }
  add_head(online, "projector.", cfg.dim, cfg.boundary_init_scale, rng);
  add_head(online, "predictor.", cfg.dim, cfg.boundary_init_scale, rng);

  ParamSet target;
  for (std::size_t i = 0; i < online.size(); ++i)
    if (online.name(i).rfind("predictor.", 0) != 0) target.add(online.name(i), online[i]);
  return TwinModel{cfg, graph, std::move(online), std::move(target)};
}

ad::Tensor to_batch(const std::vector<const data::SkeletonSequence*>& xs) {
  if (xs.empty()) throw InvalidInput("to_batch: empty batch");
  const std::size_t T = xs.front()->frames, V = xs.front()->joints;
  std::vector<double> buf;
  buf.reserve(xs.size() * 3 * T * V);
  for (const auto* x : xs) {
    if (x->frames != T || x->joints != V) throw ShapeError("to_batch: sequences differ in shape");
    buf.insert(buf.end(), x->coords.begin(), x->coords.end());
  }
  return ad::Tensor({xs.size(), 3, T, V}, std::move(buf));
}

ad::Tensor to_batch(const data::Dataset& xs) {
  std::vector<const data::SkeletonSequence*> ptrs;
  for (const auto& x : xs) ptrs.push_back(&x);
  return to_batch(ptrs);
}

ad::Var encoder_forward(ad::Var x, const BoundParams& p, const SkeletonGraph& graph, const ModelConfig& cfg,
                        const std::string& prefix) {
  const ad::Shape& s = x.shape();
  if (s.size() != 4 || s[1] != cfg.in_channels)
    throw ShapeError("encoder: expected (N, " + std::to_string(cfg.in_channels) + ", T, V), got " + ad::shape_str(s));
  if (s[3] != graph.num_joints)
    throw ShapeError("encoder: input has " + std::to_string(s[3]) + " joints, graph has " +
                     std::to_string(graph.num_joints));
  ad::Var adj = x.tape().constant(ad::Tensor({graph.num_joints, graph.num_joints}, graph.adjacency));
  ad::Var h = x;
  for (std::size_t b = 0; b < cfg.blocks; ++b) {
    h = ad::graph_aggregate(h, adj);
    h = ad::relu(ad::conv_time(h, p(prefix + block_name(b, "mix.w")), p(prefix + block_name(b, "mix.b"))));
    h = ad::relu(ad::conv_time(h, p(prefix + block_name(b, "tconv.w")), p(prefix + block_name(b, "tconv.b"))));
  }
  // Global mean pooling over V, then T.
  return ad::mean(ad::mean(h, 3), 2);
}

ad::Var head_forward(ad::Var y, const BoundParams& p, const std::string& prefix) {
  ad::Var w1 = p(prefix + "fc1.w");
  if (y.shape().size() != 2 || y.shape()[1] != w1.shape()[0])
    throw ShapeError("head " + prefix + ": expected (N, " + std::to_string(w1.shape()[0]) + "), got " +
                     ad::shape_str(y.shape()));
  ad::Var h = ad::relu(ad::add(ad::matmul(y, w1), p(prefix + "fc1.b")));
  return ad::add(ad::matmul(h, p(prefix + "fc2.w")), p(prefix + "fc2.b"));
}

TwinOutputs twin_forward(ad::Tape& tape, const BoundParams& online, const ad::Tensor& x,
                         const ad::Tensor& x_hat, const TwinModel& twin, geometry::Curvature c) {
  if (x.shape() != x_hat.shape()) throw ShapeError("twin_forward: views differ in shape");
  TwinOutputs out;
  ad::Var xo = tape.constant(x);
  out.z = head_forward(encoder_forward(xo, online, twin.graph, twin.config), online, "projector.");
  out.p = head_forward(out.z, online, "predictor.");
  out.h = ad::exp_map0(out.p, c);

  const BoundParams target = bind(tape, twin.target, false);
  ad::Var xt = tape.constant(x_hat);
  out.z_hat = head_forward(encoder_forward(xt, target, twin.graph, twin.config), target, "projector.");
  out.h_hat = ad::exp_map0(out.z_hat, c);
  return out;
}

void ema_update(TwinModel& twin, double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw InvalidInput("ema_update: coefficient must be in [0, 1]");
  for (std::size_t i = 0; i < twin.target.size(); ++i) {
    ad::Tensor& t = twin.target[i];
    const ad::Tensor& o = twin.online.get(twin.target.name(i));
    if (t.shape() != o.shape()) throw ShapeError("ema_update: shape mismatch for " + twin.target.name(i));
    if (a == 1.0) continue;
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = a == 0.0 ? o[k] : a * t[k] + (1.0 - a) * o[k];
  }
}

ad::Tensor encode(const ParamSet& params, const ad::Tensor& x, const SkeletonGraph& graph, const ModelConfig& cfg) {
  ad::Tape tape;
  const BoundParams p = bind(tape, params, false);
  return encoder_forward(tape.constant(x), p, graph, cfg).value();
}

}  // namespace hysp::model
