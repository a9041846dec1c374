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


#include "hysp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hysp::geometry {

namespace {

// Rounding slack when re-checking a point that project_to_ball just rescaled.
constexpr double kBallSlack = 1e-12;

void require_finite(std::span<const double> v, const char* what) {
  if (!all_finite(v)) {
    throw InvalidInput(std::string(what) + ": non-finite input");
  }
}

void require_compatible(const PoincarePoint& a, const PoincarePoint& b, const char* what) {
  if (a.curvature() != b.curvature()) {
    throw InvalidInput(std::string(what) + ": curvature mismatch");
  }
  if (a.dim() != b.dim()) {
    throw InvalidInput(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) +
                       " vs " + std::to_string(b.dim()) + ")");
  }
}

}  // namespace

Curvature::Curvature(double c) : c_(c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InvalidInput("curvature must be positive and finite, got " + std::to_string(c));
  }
}

double Curvature::sqrt_c() const { return std::sqrt(c_); }
double Curvature::ball_radius() const { return 1.0 / std::sqrt(c_); }

PoincarePoint::PoincarePoint(EuclideanVec coords, Curvature c) : coords_(std::move(coords)), c_(c) {
  require_finite(coords_, "PoincarePoint");
  if (c_.sqrt_c() * geometry::norm(coords_) > 1.0 - kBallEps + kBallSlack) {
    throw InvalidInput("PoincarePoint: coordinates outside the clamped ball");
  }
}

double PoincarePoint::norm() const { return geometry::norm(coords_); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> v) { return dot(v, v); }
double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

PoincarePoint project_to_ball(std::span<const double> v, Curvature c) {
  require_finite(v, "project_to_ball");
  EuclideanVec out(v.begin(), v.end());
  const double n = norm(v);
  const double max_norm = (1.0 - kBallEps) / c.sqrt_c();
  if (n > max_norm) {
    const double s = max_norm / n;
    for (double& x : out) x *= s;
  }
  return PoincarePoint(std::move(out), c);
}

PoincarePoint exp_map0(std::span<const double> z, Curvature c) {
  require_finite(z, "exp_map0");
  const double sc = c.sqrt_c();
  const double scaled = sc * norm(z);
  EuclideanVec out(z.begin(), z.end());
  if (scaled > 0.0) {
    const double s = std::tanh(scaled) / scaled;
    for (double& x : out) x *= s;
  }
  return project_to_ball(out, c);
}

double poincare_distance(std::span<const double> h, std::span<const double> h_hat, Curvature c) {
  const double cv = c.value();
  double diff2 = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double d = h[i] - h_hat[i];
    diff2 += d * d;
  }
  if (diff2 == 0.0) return 0.0;
  const double a = 1.0 - cv * squared_norm(h);
  const double b = 1.0 - cv * squared_norm(h_hat);
  const double arg = std::max(1.0 + 2.0 * cv * diff2 / (a * b), kAcoshFloor);
  return std::acosh(arg) / std::sqrt(cv);
}

double poincare_loss(const PoincarePoint& h, const PoincarePoint& h_hat) {
  require_compatible(h, h_hat, "poincare_loss");
  return poincare_distance(h.coords(), h_hat.coords(), h.curvature());
}

double uncertainty(const PoincarePoint& h_hat) {
  return 1.0 - h_hat.curvature().sqrt_c() * h_hat.norm();
}

RiemannianGrad riemannian_grad_poincare(const PoincarePoint& h, const PoincarePoint& h_hat) {
  require_compatible(h, h_hat, "riemannian_grad_poincare");
  const std::size_t n = h.dim();
  // Work in unit-ball coordinates; the curvature-c gradient is the unit-ball
  // gradient evaluated at sqrt(c)-scaled points.
  const double sc = h.curvature().sqrt_c();
  EuclideanVec x(n), y(n), diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = sc * h.coords()[i];
    y[i] = sc * h_hat.coords()[i];
    diff[i] = x[i] - y[i];
  }
  const double d = norm(diff);
  if (d <= kCoincideEps) {
    return {EuclideanVec(n, 0.0), true};
  }
  const double a = 1.0 - squared_norm(x);
  const double b = 1.0 - squared_norm(y);
  const double scale = a * a / (2.0 * std::sqrt(a * b + d * d));
  EuclideanVec g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = scale * (diff[i] / d + x[i] * d / a);
  }
  return {std::move(g), false};
}

double conformal_factor(std::span<const double> x, Curvature c) {
  const double a = 1.0 - c.value() * squared_norm(x);
  return a * a / 4.0;
}

PoincarePoint rsgd_step(const PoincarePoint& x, std::span<const double> euclid_grad, double lr) {
  require_finite(euclid_grad, "rsgd_step");
  if (euclid_grad.size() != x.dim()) {
    throw InvalidInput("rsgd_step: gradient dimension mismatch");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw InvalidInput("rsgd_step: learning rate must be positive");
  }
  const double k = lr * conformal_factor(x.coords(), x.curvature());
  EuclideanVec next(x.vec());
  for (std::size_t i = 0; i < next.size(); ++i) next[i] -= k * euclid_grad[i];
  return project_to_ball(next, x.curvature());
}

}  // namespace hysp::geometry
