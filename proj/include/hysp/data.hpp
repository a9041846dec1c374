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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "hysp/rng.hpp"
#include "hysp/skeleton.hpp"

namespace hysp::data {

/// One skeleton clip. coords is (3, T, V) row-major, in body lengths.
struct SkeletonSequence {
  std::size_t frames = 0;
  std::size_t joints = 0;
  std::vector<double> coords;
  int class_id = 0;
  std::uint32_t sample_id = 0;
  double actor_scale = 1.0;

  double& at(std::size_t c, std::size_t t, std::size_t v) { return coords[(c * frames + t) * joints + v]; }
  double at(std::size_t c, std::size_t t, std::size_t v) const {
    return coords[(c * frames + t) * joints + v];
  }
  void validate() const;
};

struct SyntheticClassSpec {
  int class_id = 0;
  /// (3, V) row-major.
  std::vector<double> base_pose;
  double motion_amplitude = 0.0;
  /// Cycles over the whole clip.
  double motion_frequency = 1.0;
  std::vector<bool> moving_joint_mask;
  /// (3, V) row-major unit direction of each joint's oscillation.
  std::vector<double> motion_axes;
  double noise_sigma = 0.0;
  /// Per-sample camera yaw about the vertical axis, drawn from [-v, v] degrees.
  double view_yaw_deg = 0.0;

  void validate(std::size_t joints) const;
};

struct AugmentationConfig {
  double shear = 0.5;
  std::pair<double, double> crop_ratio{0.5, 1.0};
  /// Maximum rotation angle in degrees.
  double rotate_max_deg = 30.0;
  double axis_mask_prob = 0.3;
  double spatial_flip_prob = 0.5;
  double temporal_flip_prob = 0.5;
  double noise_sigma = 0.01;
  /// Normalized internally; {1} disables blurring.
  std::vector<double> blur_kernel{0.25, 0.5, 0.25};

  void validate() const;
  /// Every augmentation switched off.
  static AugmentationConfig identity();
};

using Dataset = std::vector<SkeletonSequence>;

/// Classes differing only by motion amplitude: the three-class desk setup.
std::vector<SyntheticClassSpec> amplitude_classes(const std::vector<double>& amplitudes,
                                                  const SkeletonGraph& graph, double frequency,
                                                  double noise_sigma, double view_yaw_deg = 0.0);

/// Per-sample phase is drawn from [-kPhaseJitter, kPhaseJitter].
inline constexpr double kPhaseJitter = 0.785398163397448310;

/// Deterministic in seed. Coordinates are rounded to 32-bit floats so the
/// cache file reproduces them exactly.
Dataset generate_dataset(const std::vector<SyntheticClassSpec>& specs, std::size_t n_per_class,
                         std::size_t frames, std::uint64_t seed);

SkeletonSequence temporal_resize(const SkeletonSequence& x, std::size_t frames_out);

// Individual augmentations, exposed for testing.
SkeletonSequence apply_linear(const SkeletonSequence& x, const std::array<double, 9>& m);
SkeletonSequence spatial_flip(const SkeletonSequence& x, const SkeletonGraph& graph);
SkeletonSequence axis_mask(const SkeletonSequence& x, std::size_t axis);
SkeletonSequence temporal_crop(const SkeletonSequence& x, std::size_t start, std::size_t length);
SkeletonSequence temporal_flip(const SkeletonSequence& x);
SkeletonSequence temporal_blur(const SkeletonSequence& x, const std::vector<double>& kernel);

/// Shear then crop-and-resize.
SkeletonSequence augment_normal(const SkeletonSequence& x, const AugmentationConfig& cfg, CounterRng& rng);
/// Shear, spatial flip, rotation, axis mask, crop, temporal flip, noise, blur.
SkeletonSequence augment_extreme(const SkeletonSequence& x, const AugmentationConfig& cfg,
                                 const SkeletonGraph& graph, CounterRng& rng);

struct ViewPair {
  SkeletonSequence online;
  SkeletonSequence target;
};

/// Extreme view for the online branch, normal view for the target branch, each
/// from its own (seed, sample_id, epoch) stream.
ViewPair make_view_pair(const SkeletonSequence& x, const AugmentationConfig& cfg, const SkeletonGraph& graph,
                        std::uint64_t seed, std::uint32_t epoch);

struct DatasetHeader {
  std::uint32_t version = 1;
  std::uint32_t joints = 0;
  std::uint32_t frames = 0;
  std::uint32_t classes = 0;
  std::uint64_t seed = 0;
};

void save_dataset(const Dataset& ds, const DatasetHeader& header, const std::filesystem::path& path);
std::pair<DatasetHeader, Dataset> load_dataset(const std::filesystem::path& path);

/// Stratified split: a fixed fraction of each class goes to the test side.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
Split stratified_split(const Dataset& ds, double test_fraction, std::uint64_t seed);

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices);

}  // namespace hysp::data
