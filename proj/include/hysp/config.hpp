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

#include <json.hpp>

#include "hysp/data.hpp"
#include "hysp/model.hpp"
#include "hysp/objectives.hpp"

namespace hysp {

struct DataConfig {
  std::vector<double> amplitudes{0.05, 0.3, 1.0};
  std::size_t n_per_class = 100;
  std::size_t frames = 20;
  double frequency = 1.0;
  double noise_sigma = 0.01;
  double view_yaw_deg = 0.0;
  double test_fraction = 0.3;
  std::uint64_t seed = 1;
};

struct ProbeConfig {
  int epochs = 100;
  std::size_t batch_size = 32;
  double lr = 0.1;
  double momentum = 0.9;
};

struct TrainConfig {
  int epochs = 30;
  std::size_t batch_size = 32;
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double curvature = 1.0;
  objectives::CurriculumSchedule schedule{6, 12};
  double tau = 0.07;
  std::size_t queue_capacity = 256;
  bool with_negatives = false;
  bool without_hyperbolic = false;
  bool without_curriculum = false;
  std::uint64_t seed = 1;
  model::ModelConfig model;
  data::AugmentationConfig augmentation;
  DataConfig data;
  ProbeConfig probe;

  void validate() const;
};

/// "desk" (CPU-sized) or "paper" (full-length schedule and batch size).
TrainConfig preset(const std::string& name);

nlohmann::json to_json(const TrainConfig& cfg);
/// Missing keys keep the values already in `base`; unknown keys are rejected.
TrainConfig merge_json(TrainConfig base, const nlohmann::json& j);

/// FNV-1a of the canonical JSON serialization.
std::uint64_t config_hash(const TrainConfig& cfg);

/// FNV-1a of raw bytes, as 16 lowercase hex digits.
std::string content_hash(const std::string& bytes);

}  // namespace hysp
