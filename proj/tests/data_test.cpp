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


#include "hysp/data.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "hysp/errors.hpp"

namespace hysp::data {
namespace {

const SkeletonGraph kGraph = default_skeleton();

Dataset desk_dataset(std::size_t n = 20, std::size_t frames = 20, std::uint64_t seed = 3) {
  return generate_dataset(amplitude_classes({0.05, 0.3, 1.0}, kGraph, 1.0, 0.01), n, frames, seed);
}

double max_abs_diff(const SkeletonSequence& a, const SkeletonSequence& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) m = std::max(m, std::abs(a.coords[i] - b.coords[i]));
  return m;
}

TEST(SkeletonGraph, AdjacencySymmetricWithBoundedRowSums) {
  const std::size_t V = kGraph.num_joints;
  ASSERT_EQ(kGraph.adjacency.size(), V * V);
  for (std::size_t i = 0; i < V; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < V; ++j) {
      EXPECT_EQ(kGraph.adjacency[i * V + j], kGraph.adjacency[j * V + i]);
      row += kGraph.adjacency[i * V + j];
    }
    EXPECT_GE(row, 0.0);
    EXPECT_LE(row, 1.0 + 1e-6);
  }
}

TEST(SkeletonGraph, AdjacencyMatchesEdgeList) {
  const std::size_t V = kGraph.num_joints;
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (auto [i, j] : kGraph.edges) {
    edges.insert({i, j});
    edges.insert({j, i});
  }
  for (std::size_t i = 0; i < V; ++i)
    for (std::size_t j = 0; j < V; ++j) {
      const bool linked = i == j || edges.count({i, j}) > 0;
      EXPECT_EQ(kGraph.adjacency[i * V + j] > 0.0, linked) << i << "," << j;
    }
}

TEST(SkeletonGraph, RejectsNonInvolutionMirror) {
  EXPECT_THROW(SkeletonGraph::build(3, {{0, 1}}, {1, 2, 0}), InvalidInput);
  EXPECT_THROW(SkeletonGraph::build(2, {{0, 0}}, {0, 1}), InvalidInput);
}

TEST(Generate, ShapeContract) {
  const Dataset ds = generate_dataset(amplitude_classes({0.05, 0.3, 1.0}, kGraph, 1.0, 0.01), 100, 50, 1);
  ASSERT_EQ(ds.size(), 300u);
  for (const auto& x : ds) {
    EXPECT_EQ(x.frames, 50u);
    EXPECT_EQ(x.joints, 8u);
    EXPECT_EQ(x.coords.size(), 3u * 50 * 8);
    EXPECT_GE(x.actor_scale, 0.8);
    EXPECT_LE(x.actor_scale, 1.2);
  }
}

TEST(Generate, StillClassIsScaledBasePose) {
  const auto specs = amplitude_classes({0.0}, kGraph, 1.0, 0.0);
  const Dataset ds = generate_dataset(specs, 5, 10, 4);
  for (const auto& x : ds)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t t = 0; t < x.frames; ++t)
        for (std::size_t v = 0; v < x.joints; ++v)
          EXPECT_EQ(x.at(c, t, v), static_cast<double>(static_cast<float>(specs[0].base_pose[c * 8 + v] * x.actor_scale)));
}

TEST(Generate, SameSeedBitIdentical) {
  const Dataset a = desk_dataset(), b = desk_dataset();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].coords, b[i].coords);
  const Dataset c = desk_dataset(20, 20, 4);
  EXPECT_NE(a[0].coords, c[0].coords);
}

TEST(Generate, InvalidSpecThrows) {
  EXPECT_THROW(generate_dataset({}, 5, 10, 1), InvalidInput);
  auto specs = amplitude_classes({0.5}, kGraph, 1.0, 0.0);
  specs[0].moving_joint_mask.assign(8, false);
  EXPECT_THROW(generate_dataset(specs, 5, 10, 1), InvalidInput);
  specs = amplitude_classes({0.5}, kGraph, 0.0, 0.0);
  EXPECT_THROW(generate_dataset(specs, 5, 10, 1), InvalidInput);
}

// Mean distance between samples of two classes grows with their amplitude gap.
TEST(Generate, InterClassDistanceIncreasesWithAmplitudeGap) {
  const std::vector<double> amps{0.05, 0.3, 1.0};
  const Dataset ds = generate_dataset(amplitude_classes(amps, kGraph, 1.0, 0.01), 40, 20, 8);
  std::vector<std::pair<double, double>> gap_dist;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      double total = 0.0;
      int n = 0;
      for (const auto& a : ds)
        for (const auto& b : ds)
          if (a.class_id == i && b.class_id == j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < a.coords.size(); ++k) d2 += std::pow(a.coords[k] - b.coords[k], 2);
            total += std::sqrt(d2);
            ++n;
          }
      gap_dist.push_back({std::abs(amps[static_cast<std::size_t>(i)] - amps[static_cast<std::size_t>(j)]), total / n});
    }
  std::sort(gap_dist.begin(), gap_dist.end());
  for (std::size_t k = 1; k < gap_dist.size(); ++k) EXPECT_GT(gap_dist[k].second, gap_dist[k - 1].second);
}

TEST(TemporalResize, SameLengthIsIdentity) {
  const auto x = desk_dataset(1)[2];
  EXPECT_EQ(temporal_resize(x, x.frames).coords, x.coords);
}

TEST(TemporalResize, LinearRamp) {
  SkeletonSequence x;
  x.frames = 2;
  x.joints = 1;
  x.coords = {0.0, 1.0, 0.0, 2.0, 5.0, 5.0};
  const auto y = temporal_resize(x, 5);
  const double expect[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_EQ(y.at(0, t, 0), expect[t]);
    EXPECT_EQ(y.at(1, t, 0), 2.0 * expect[t]);
    EXPECT_EQ(y.at(2, t, 0), 5.0);
  }
}

TEST(TemporalResize, EndpointsPreserved) {
  const auto x = desk_dataset(1)[2];
  for (std::size_t t_out : {2u, 7u, 33u, 50u}) {
    const auto y = temporal_resize(x, t_out);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t v = 0; v < x.joints; ++v) {
        EXPECT_EQ(y.at(c, 0, v), x.at(c, 0, v));
        EXPECT_EQ(y.at(c, t_out - 1, v), x.at(c, x.frames - 1, v));
      }
  }
}

TEST(TemporalResize, SmoothRoundTripError) {
  const double amplitude = 1.0;
  SkeletonSequence x;
  x.frames = 20;
  x.joints = 1;
  x.coords.resize(60);
  for (std::size_t t = 0; t < 20; ++t)
    for (std::size_t c = 0; c < 3; ++c)
      x.at(c, t, 0) = amplitude * std::sin(2.0 * std::numbers::pi * (t / 19.0) + static_cast<double>(c));
  const auto back = temporal_resize(temporal_resize(x, 50), 20);
  EXPECT_LT(max_abs_diff(back, x), 0.05 * amplitude);
}

TEST(TemporalResize, RejectsShortOutput) {
  EXPECT_THROW(temporal_resize(desk_dataset(1)[0], 1), InvalidInput);
}

TEST(Augment, DegenerateNormalIsIdentity) {
  const auto x = desk_dataset(1)[2];
  CounterRng rng(1, 0, 0, StreamPurpose::kTargetView);
  EXPECT_EQ(augment_normal(x, AugmentationConfig::identity(), rng).coords, x.coords);
}

TEST(Augment, DegenerateExtremeIsIdentity) {
  const auto x = desk_dataset(1)[2];
  CounterRng rng(1, 0, 0, StreamPurpose::kOnlineView);
  EXPECT_EQ(augment_extreme(x, AugmentationConfig::identity(), kGraph, rng).coords, x.coords);
}

TEST(Augment, PreservesShapeAndFiniteness) {
  const AugmentationConfig cfg;
  for (const auto& x : desk_dataset(5)) {
    CounterRng r1(2, x.sample_id, 0, StreamPurpose::kOnlineView);
    CounterRng r2(2, x.sample_id, 0, StreamPurpose::kTargetView);
    for (const auto& y : {augment_extreme(x, cfg, kGraph, r1), augment_normal(x, cfg, r2)}) {
      EXPECT_EQ(y.frames, x.frames);
      EXPECT_EQ(y.joints, x.joints);
      EXPECT_NO_THROW(y.validate());
    }
  }
}

TEST(Augment, SameStreamSameResult) {
  const auto x = desk_dataset(1)[1];
  const AugmentationConfig cfg;
  CounterRng a(5, x.sample_id, 2, StreamPurpose::kTargetView);
  CounterRng b(5, x.sample_id, 2, StreamPurpose::kTargetView);
  EXPECT_EQ(augment_normal(x, cfg, a).coords, augment_normal(x, cfg, b).coords);
}

TEST(Augment, TemporalFlipIsInvolution) {
  const auto x = desk_dataset(1)[2];
  EXPECT_EQ(temporal_flip(temporal_flip(x)).coords, x.coords);
  EXPECT_NE(temporal_flip(x).coords, x.coords);
}

TEST(Augment, SpatialFlipIsInvolution) {
  const auto x = desk_dataset(1)[2];
  EXPECT_EQ(spatial_flip(spatial_flip(x, kGraph), kGraph).coords, x.coords);
}

TEST(Augment, AxisMaskZeroesExactlyOneRow) {
  const auto x = desk_dataset(1)[2];
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const auto y = axis_mask(x, axis);
    int nonzero_rows = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      bool any = false;
      for (std::size_t t = 0; t < y.frames; ++t)
        for (std::size_t v = 0; v < y.joints; ++v) any = any || y.at(c, t, v) != 0.0;
      nonzero_rows += any ? 1 : 0;
    }
    EXPECT_EQ(nonzero_rows, 2);
  }
}

TEST(Augment, BlurPreservesConstantSignal) {
  SkeletonSequence x;
  x.frames = 6;
  x.joints = 2;
  x.coords.assign(36, 0.7);
  const auto y = temporal_blur(x, {1.0, 2.0, 1.0});
  for (double v : y.coords) EXPECT_NEAR(v, 0.7, 1e-15);
}

TEST(Augment, ConfigValidation) {
  AugmentationConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.axis_mask_prob = 1.5;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = {};
  cfg.crop_ratio = {0.9, 0.5};
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = {};
  cfg.blur_kernel = {1.0, 1.0};
  EXPECT_THROW(cfg.validate(), InvalidInput);
}

TEST(ViewPair, DegenerateConfigReturnsInput) {
  const auto x = desk_dataset(1)[0];
  const auto pair = make_view_pair(x, AugmentationConfig::identity(), kGraph, 1, 0);
  EXPECT_EQ(pair.online.coords, x.coords);
  EXPECT_EQ(pair.target.coords, x.coords);
}

TEST(ViewPair, ViewsDifferOnDefaultConfig) {
  const Dataset ds = generate_dataset(amplitude_classes({0.05, 0.3, 1.0}, kGraph, 1.0, 0.01), 34, 20, 2);
  int differ = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto p = make_view_pair(ds[i], AugmentationConfig{}, kGraph, 9, 1);
    differ += p.online.coords != p.target.coords ? 1 : 0;
  }
  EXPECT_EQ(differ, 100);
}

TEST(ViewPair, DeterministicPerSeedSampleEpoch) {
  const auto x = desk_dataset(1)[1];
  const auto a = make_view_pair(x, {}, kGraph, 4, 2);
  const auto b = make_view_pair(x, {}, kGraph, 4, 2);
  EXPECT_EQ(a.online.coords, b.online.coords);
  EXPECT_EQ(a.target.coords, b.target.coords);
  const auto c = make_view_pair(x, {}, kGraph, 4, 3);
  EXPECT_NE(a.online.coords, c.online.coords);
}

TEST(DatasetCache, RoundTripIsBitIdenticalToRegeneration) {
  const auto path = std::filesystem::temp_directory_path() / "hysp_data_test_cache.bin";
  const Dataset ds = desk_dataset(10, 20, 6);
  save_dataset(ds, {1, 8, 20, 3, 6}, path);
  const auto [header, loaded] = load_dataset(path);
  EXPECT_EQ(header.joints, 8u);
  EXPECT_EQ(header.frames, 20u);
  EXPECT_EQ(header.classes, 3u);
  EXPECT_EQ(header.seed, 6u);
  const Dataset regen = desk_dataset(10, 20, 6);
  ASSERT_EQ(loaded.size(), regen.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_EQ(loaded[i].coords, regen[i].coords);
    EXPECT_EQ(loaded[i].class_id, regen[i].class_id);
    EXPECT_EQ(loaded[i].sample_id, regen[i].sample_id);
    EXPECT_EQ(loaded[i].actor_scale, regen[i].actor_scale);
  }
  std::filesystem::remove(path);
}

TEST(DatasetCache, TruncatedFileThrows) {
  const auto path = std::filesystem::temp_directory_path() / "hysp_data_test_trunc.bin";
  save_dataset(desk_dataset(2), {1, 8, 20, 3, 3}, path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 10);
  EXPECT_THROW(load_dataset(path), IoError);
  std::filesystem::remove(path);
}

TEST(StratifiedSplit, PartitionsEachClass) {
  const Dataset ds = desk_dataset(20);
  const Split s = stratified_split(ds, 0.3, 1);
  EXPECT_EQ(s.train.size() + s.test.size(), ds.size());
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  for (int k = 0; k < 3; ++k)
    EXPECT_EQ(std::count_if(s.test.begin(), s.test.end(), [&](std::size_t i) { return ds[i].class_id == k; }), 6);
}

}  // namespace
}  // namespace hysp::data
