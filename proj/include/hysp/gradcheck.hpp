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

#include <cstdint>
#include <string>
#include <vector>

namespace hysp::gradcheck {

struct CheckRow {
  std::string name;
  /// Worst relative error over all seeds and differentiable inputs.
  double max_rel_error = 0.0;
  int seeds = 0;
  bool pass = false;
};

inline constexpr double kPrimitiveTolerance = 1e-4;
inline constexpr double kRiemannianTolerance = 1e-5;

/// Analytic vs central-difference gradients for every primitive and for the
/// composite twin losses, over seeds 0..n_seeds-1.
std::vector<CheckRow> run_primitive_suite(int n_seeds = 20, double tol = kPrimitiveTolerance);

struct RiemannianOracleResult {
  double max_rel_error = 0.0;
  int pairs = 0;
  double seconds = 0.0;
};

/// Closed-form Riemannian gradient vs conformal factor times the central
/// difference of the distance, over random pairs with norms in [0.05, 0.95].
RiemannianOracleResult run_riemannian_oracle(int pairs, const std::vector<int>& dims, std::uint64_t seed);

}  // namespace hysp::gradcheck
