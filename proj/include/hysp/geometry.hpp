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

#include <span>
#include <vector>

#include "hysp/errors.hpp"

// Poincare-ball primitives. All routines work in double precision and are pure.
namespace hysp::geometry {

/// Points are kept at least this far (in scaled norm) from the ball boundary.
inline constexpr double kBallEps = 1e-5;
/// Lower clamp on the acosh argument of the Poincare distance.
inline constexpr double kAcoshFloor = 1.0 + 1e-15;
/// Two points closer than this are treated as coincident by the gradient.
inline constexpr double kCoincideEps = 1e-12;

using EuclideanVec = std::vector<double>;

class Curvature {
 public:
  Curvature() = default;
  explicit Curvature(double c);

  double value() const { return c_; }
  double sqrt_c() const;
  /// Radius of the ball, 1/sqrt(c).
  double ball_radius() const;

  friend bool operator==(const Curvature&, const Curvature&) = default;

 private:
  double c_ = 1.0;
};

/// A vector strictly inside the ball of curvature c.
class PoincarePoint {
 public:
  PoincarePoint() = default;
  /// Validates the ball invariant; use project_to_ball to obtain one from an arbitrary vector.
  PoincarePoint(EuclideanVec coords, Curvature c);

  std::span<const double> coords() const { return coords_; }
  const EuclideanVec& vec() const { return coords_; }
  Curvature curvature() const { return c_; }
  std::size_t dim() const { return coords_.size(); }
  double norm() const;

 private:
  EuclideanVec coords_;
  Curvature c_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
double squared_norm(std::span<const double> v);
bool all_finite(std::span<const double> v);

PoincarePoint project_to_ball(std::span<const double> v, Curvature c);

/// tanh(sqrt(c)|z|) z / (sqrt(c)|z|), then projected into the ball. z = 0 maps to the origin.
PoincarePoint exp_map0(std::span<const double> z, Curvature c);

/// Distance between raw coordinate vectors inside the ball of curvature c;
/// no ball check. Shared by the PoincarePoint overload and the autodiff primitive.
double poincare_distance(std::span<const double> h, std::span<const double> h_hat, Curvature c);

/// Geodesic distance. At c = 1 this is acosh(1 + 2|h-g|^2 / ((1-|h|^2)(1-|g|^2))).
double poincare_loss(const PoincarePoint& h, const PoincarePoint& h_hat);

/// 1 - sqrt(c)|h_hat|; equals 1 - |h_hat| for the unit ball.
double uncertainty(const PoincarePoint& h_hat);

struct RiemannianGrad {
  EuclideanVec vec;
  /// Set when h and h_hat coincide; vec is then zero.
  bool at_minimum = false;
};

/// Closed-form Riemannian gradient of poincare_loss with respect to h.
RiemannianGrad riemannian_grad_poincare(const PoincarePoint& h, const PoincarePoint& h_hat);

/// Inverse of the ball metric at x: (1 - c|x|^2)^2 / 4.
double conformal_factor(std::span<const double> x, Curvature c);

/// One Riemannian SGD step using a projection retraction.
PoincarePoint rsgd_step(const PoincarePoint& x, std::span<const double> euclid_grad, double lr);

}  // namespace hysp::geometry
