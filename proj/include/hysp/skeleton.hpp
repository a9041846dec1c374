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
#include <utility>
#include <vector>

namespace hysp {

/// Joint graph shared by the encoder (adjacency) and the augmentations (mirror map).
struct SkeletonGraph {
  std::size_t num_joints = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  /// mirror[v] is the joint that v maps to under a left-right flip.
  std::vector<std::size_t> mirror;
  /// Row-major V x V normalized adjacency with self-loops.
  std::vector<double> adjacency;

  static SkeletonGraph build(std::size_t num_joints, std::vector<std::pair<std::size_t, std::size_t>> edges,
                             std::vector<std::size_t> mirror);
};

/// Eight joints: head, torso, left elbow, left hand, right elbow, right hand,
/// left foot, right foot.
SkeletonGraph default_skeleton();

/// Rest pose (3 x V, row-major by coordinate) for default_skeleton, in body lengths.
std::vector<double> default_rest_pose();

}  // namespace hysp
