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
#include <string>
#include <vector>

#include "hysp/data.hpp"
#include "hysp/diff_engine.hpp"
#include "hysp/geometry.hpp"
#include "hysp/skeleton.hpp"

namespace hysp::model {

struct ModelConfig {
  std::size_t joints = 8;
  std::size_t in_channels = 3;
  std::size_t hidden = 32;
  /// Embedding dimension D.
  std::size_t dim = 64;
  /// Number of encoder blocks B.
  std::size_t blocks = 2;
  /// Temporal kernel width, odd.
  std::size_t kernel = 3;
  double ema_coefficient = 0.99;
  /// Multiplies the output-layer weights of the projector and predictor.
  double boundary_init_scale = 1.0;

  void validate() const;
};

/// Ordered named parameter tensors.
class ParamSet {
 public:
  void add(std::string name, ad::Tensor value);
  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  ad::Tensor& operator[](std::size_t i) { return values_[i]; }
  const ad::Tensor& operator[](std::size_t i) const { return values_[i]; }
  /// Throws InvalidInput for an unknown name.
  const ad::Tensor& get(const std::string& name) const;
  ad::Tensor& get(const std::string& name);
  bool contains(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;
  std::size_t element_count() const;
  /// FNV-1a over names, shapes and raw value bits.
  std::uint64_t hash() const;

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<ad::Tensor> values_;
};

/// Parameters placed on a tape, aligned with the ParamSet they came from.
struct BoundParams {
  const ParamSet* params = nullptr;
  std::vector<ad::Var> vars;

  ad::Var operator()(const std::string& name) const { return vars[params->index_of(name)]; }
};

BoundParams bind(ad::Tape& tape, const ParamSet& params, bool requires_grad);

/// Online parameters hold "encoder.*", "projector.*" and "predictor.*";
/// target parameters hold "encoder.*" and "projector.*".
struct TwinModel {
  ModelConfig config;
  SkeletonGraph graph;
  ParamSet online;
  ParamSet target;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) from the seed's init stream. The
/// target branch starts as an exact copy of the online encoder and projector.
TwinModel init_twin(const ModelConfig& cfg, const SkeletonGraph& graph, std::uint64_t seed);

/// Stacks sequences into an (N, 3, T, V) tensor.
ad::Tensor to_batch(const std::vector<const data::SkeletonSequence*>& xs);
ad::Tensor to_batch(const data::Dataset& xs);

/// (N, 3, T, V) -> (N, D). Parameter names are read under `prefix`, e.g. "encoder.".
ad::Var encoder_forward(ad::Var x, const BoundParams& p, const SkeletonGraph& graph, const ModelConfig& cfg,
                        const std::string& prefix = "encoder.");
/// linear -> ReLU -> linear on (N, D).
ad::Var head_forward(ad::Var y, const BoundParams& p, const std::string& prefix);

struct TwinOutputs {
  /// Pre-map online prediction p and target projection z_hat.
  ad::Var p;
  ad::Var z_hat;
  /// Online projection z, before the predictor.
  ad::Var z;
  ad::Var h;
  ad::Var h_hat;
};

/// h = exp_map0(q(g(f(x)))) on the online branch; h_hat = exp_map0(g^(f^(x_hat)))
/// on the target branch, whose parameters enter the tape as constants.
TwinOutputs twin_forward(ad::Tape& tape, const BoundParams& online, const ad::Tensor& x,
                         const ad::Tensor& x_hat, const TwinModel& twin, geometry::Curvature c);

/// target <- a * target + (1 - a) * online, for every target parameter.
void ema_update(TwinModel& twin, double a);

/// Frozen encoder features (N, D) of the given parameter set, without gradients.
ad::Tensor encode(const ParamSet& params, const ad::Tensor& x, const SkeletonGraph& graph, const ModelConfig& cfg);

}  // namespace hysp::model
