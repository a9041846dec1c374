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


#include "hysp/skeleton.hpp"

#include <algorithm>
#include <cmath>

#include "hysp/errors.hpp"

namespace hysp {

SkeletonGraph SkeletonGraph::build(std::size_t num_joints,
                                   std::vector<std::pair<std::size_t, std::size_t>> edges,
                                   std::vector<std::size_t> mirror) {
  if (num_joints == 0) throw InvalidInput("skeleton: no joints");
  if (mirror.size() != num_joints) throw InvalidInput("skeleton: mirror map size mismatch");
  for (std::size_t v = 0; v < num_joints; ++v) {
    if (mirror[v] >= num_joints || mirror[mirror[v]] != v) {
      throw InvalidInput("skeleton: mirror map must be an involution");
    }
  }
  const std::size_t V = num_joints;
  std::vector<double> a(V * V, 0.0);
  for (std::size_t v = 0; v < V; ++v) a[v * V + v] = 1.0;
  for (auto [i, j] : edges) {
    if (i >= V || j >= V || i == j) throw InvalidInput("skeleton: bad edge");
    a[i * V + j] = 1.0;
    a[j * V + i] = 1.0;
  }
  std::vector<double> deg(V, 0.0);
  for (std::size_t i = 0; i < V; ++i)
    for (std::size_t j = 0; j < V; ++j) deg[i] += a[i * V + j];
  // D^-1/2 (A + I) D^-1/2, then scaled so the largest row sum is 1.
  double max_row = 0.0;
  for (std::size_t i = 0; i < V; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < V; ++j) {
      a[i * V + j] /= std::sqrt(deg[i] * deg[j]);
      row += a[i * V + j];
    }
    max_row = std::max(max_row, row);
  }
  for (double& x : a) x /= max_row;
  return SkeletonGraph{V, std::move(edges), std::move(mirror), std::move(a)};
}

SkeletonGraph default_skeleton() {
  return SkeletonGraph::build(8, {{0, 1}, {1, 2}, {2, 3}, {1, 4}, {4, 5}, {1, 6}, {1, 7}},
                              {0, 1, 4, 5, 2, 3, 7, 6});
}

std::vector<double> default_rest_pose() {
  // x (lateral), y (vertical), z (depth) per joint.
  return {
      0.0, 0.0, -0.35, -0.6, 0.35, 0.6, -0.2, 0.2,   // x
      0.9, 0.4, 0.35, 0.0, 0.35, 0.0, -0.9, -0.9,    // y
      0.0, 0.0, 0.05, 0.1, 0.05, 0.1, 0.0, 0.0,      // z
  };
}

}  // namespace hysp
