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


#include "hysp/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "binio.hpp"
#include "hysp/errors.hpp"

namespace hysp {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs < 0) throw InvalidInput("config: epochs must be >= 0");
  if (batch_size == 0) throw InvalidInput("config: batch_size must be positive");
  if (!(lr > 0.0)) throw InvalidInput("config: lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidInput("config: momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw InvalidInput("config: weight_decay must be >= 0");
  if (!(curvature > 0.0) || !std::isfinite(curvature)) throw InvalidInput("config: curvature must be positive");
  if (!(tau > 0.0)) throw InvalidInput("config: tau must be positive");
  if (with_negatives && queue_capacity == 0) throw InvalidInput("config: queue_capacity must be positive");
  objectives::CurriculumSchedule(schedule.e1, schedule.e2);
  model.validate();
  augmentation.validate();
  if (data.amplitudes.empty()) throw InvalidInput("config: at least one class amplitude is required");
  if (data.n_per_class < 2) throw InvalidInput("config: n_per_class must be >= 2");
  if (data.frames < 2) throw InvalidInput("config: frames must be >= 2");
  if (!(data.test_fraction > 0.0 && data.test_fraction < 1.0))
    throw InvalidInput("config: test_fraction must be in (0, 1)");
  if (probe.epochs <= 0 || probe.batch_size == 0 || !(probe.lr > 0.0))
    throw InvalidInput("config: probe epochs, batch_size and lr must be positive");
}

TrainConfig preset(const std::string& name) {
  TrainConfig cfg;
  if (name == "desk") return cfg;
  if (name == "paper") {
    cfg.epochs = 200;
    cfg.batch_size = 512;
    cfg.lr = 0.2;
    cfg.schedule = {50, 100};
    cfg.data.frames = 50;
    return cfg;
  }
  throw InvalidInput("unknown preset '" + name + "' (expected desk or paper)");
}

json to_json(const TrainConfig& c) {
  const auto& a = c.augmentation;
  const auto& m = c.model;
  return json{
      {"data",
       {{"amplitudes", c.data.amplitudes},
        {"n_per_class", c.data.n_per_class},
        {"frames", c.data.frames},
        {"frequency", c.data.frequency},
        {"noise_sigma", c.data.noise_sigma},
        {"view_yaw_deg", c.data.view_yaw_deg},
        {"test_fraction", c.data.test_fraction},
        {"seed", c.data.seed}}},
      {"augmentation",
       {{"shear", a.shear},
        {"crop_ratio", {a.crop_ratio.first, a.crop_ratio.second}},
        {"rotate_max_deg", a.rotate_max_deg},
        {"axis_mask_prob", a.axis_mask_prob},
        {"spatial_flip_prob", a.spatial_flip_prob},
        {"temporal_flip_prob", a.temporal_flip_prob},
        {"noise_sigma", a.noise_sigma},
        {"blur_kernel", a.blur_kernel}}},
      {"model",
       {{"joints", m.joints},
        {"in_channels", m.in_channels},
        {"hidden", m.hidden},
        {"dim", m.dim},
        {"blocks", m.blocks},
        {"kernel", m.kernel},
        {"ema_coefficient", m.ema_coefficient},
        {"boundary_init_scale", m.boundary_init_scale}}},
      {"objectives",
       {{"curvature", c.curvature},
        {"e1", c.schedule.e1},
        {"e2", c.schedule.e2},
        {"tau", c.tau},
        {"queue_capacity", c.queue_capacity}}},
      {"trainer",
       {{"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"lr", c.lr},
        {"momentum", c.momentum},
        {"weight_decay", c.weight_decay},
        {"seed", c.seed},
        {"with_negatives", c.with_negatives},
        {"without_hyperbolic", c.without_hyperbolic},
        {"without_curriculum", c.without_curriculum}}},
      {"probe",
       {{"epochs", c.probe.epochs},
        {"batch_size", c.probe.batch_size},
        {"lr", c.probe.lr},
        {"momentum", c.probe.momentum}}},
  };
}

namespace {

/// Reads known keys from one section and rejects the rest.
class Section {
 public:
  Section(const json& root, const char* name) : name_(name) {
    if (root.contains(name)) {
      if (!root[name].is_object()) throw InvalidInput(std::string("config: section '") + name + "' must be an object");
      obj_ = &root[name];
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    known_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) return;
    try {
      out = (*obj_)[key].get<T>();
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("config: ") + name_ + "." + key + ": " + e.what());
    }
  }

  void finish() const {
    if (obj_ == nullptr) return;
    for (const auto& [k, _] : obj_->items())
      if (!known_.count(k)) throw InvalidInput(std::string("config: unknown key ") + name_ + "." + k);
  }

 private:
  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> known_;
};

}  // namespace

TrainConfig merge_json(TrainConfig c, const json& j) {
  if (!j.is_object()) throw InvalidInput("config: top level must be an object");
  static const std::set<std::string> kSections{"data", "augmentation", "model", "objectives", "trainer", "probe"};
  for (const auto& [k, _] : j.items())
    if (!kSections.count(k)) throw InvalidInput("config: unknown section " + k);

  Section d(j, "data");
  d.read("amplitudes", c.data.amplitudes);
  d.read("n_per_class", c.data.n_per_class);
  d.read("frames", c.data.frames);
  d.read("frequency", c.data.frequency);
  d.read("noise_sigma", c.data.noise_sigma);
  d.read("view_yaw_deg", c.data.view_yaw_deg);
  d.read("test_fraction", c.data.test_fraction);
  d.read("seed", c.data.seed);
  d.finish();

  Section a(j, "augmentation");
  auto& aug = c.augmentation;
  a.read("shear", aug.shear);
  std::vector<double> crop{aug.crop_ratio.first, aug.crop_ratio.second};
  a.read("crop_ratio", crop);
  if (crop.size() != 2) throw InvalidInput("config: augmentation.crop_ratio must be [lo, hi]");
  aug.crop_ratio = {crop[0], crop[1]};
  a.read("rotate_max_deg", aug.rotate_max_deg);
  a.read("axis_mask_prob", aug.axis_mask_prob);
  a.read("spatial_flip_prob", aug.spatial_flip_prob);
  a.read("temporal_flip_prob", aug.temporal_flip_prob);
  a.read("noise_sigma", aug.noise_sigma);
  a.read("blur_kernel", aug.blur_kernel);
  a.finish();

  Section m(j, "model");
  m.read("joints", c.model.joints);
  m.read("in_channels", c.model.in_channels);
  m.read("hidden", c.model.hidden);
  m.read("dim", c.model.dim);
  m.read("blocks", c.model.blocks);
  m.read("kernel", c.model.kernel);
  m.read("ema_coefficient", c.model.ema_coefficient);
  m.read("boundary_init_scale", c.model.boundary_init_scale);
  m.finish();

  Section o(j, "objectives");
  o.read("curvature", c.curvature);
  int e1 = c.schedule.e1, e2 = c.schedule.e2;
  o.read("e1", e1);
  o.read("e2", e2);
  c.schedule = objectives::CurriculumSchedule(e1, e2);
  o.read("tau", c.tau);
  o.read("queue_capacity", c.queue_capacity);
  o.finish();

  Section t(j, "trainer");
  t.read("epochs", c.epochs);
  t.read("batch_size", c.batch_size);
  t.read("lr", c.lr);
  t.read("momentum", c.momentum);
  t.read("weight_decay", c.weight_decay);
  t.read("seed", c.seed);
  t.read("with_negatives", c.with_negatives);
  t.read("without_hyperbolic", c.without_hyperbolic);
  t.read("without_curriculum", c.without_curriculum);
  t.finish();

  Section p(j, "probe");
  p.read("epochs", c.probe.epochs);
  p.read("batch_size", c.probe.batch_size);
  p.read("lr", c.probe.lr);
  p.read("momentum", c.probe.momentum);
  p.finish();

  c.validate();
  return c;
}

std::uint64_t config_hash(const TrainConfig& cfg) {
  const std::string s = to_json(cfg).dump();
  return detail::fnv1a(s.data(), s.size());
}

std::string content_hash(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(bytes.data(), bytes.size())));
  return buf;
}

}  // namespace hysp
