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
#include <deque>
#include <span>
#include <vector>

#include "hysp/geometry.hpp"

namespace hysp::objectives {

using geometry::EuclideanVec;
using geometry::PoincarePoint;

/// Linear ramp between two epochs that moves the objective from angles only to
/// the full hyperbolic distance.
struct CurriculumSchedule {
  int e1 = 50;
  int e2 = 100;

  CurriculumSchedule() = default;
  CurriculumSchedule(int e1, int e2);
};

struct Temperature {
  double tau = 0.07;

  Temperature() = default;
  explicit Temperature(double tau);
};

/// Fixed-capacity FIFO memory bank of unit-norm vectors.
class NegativeQueue {
 public:
  explicit NegativeQueue(std::size_t capacity);

  /// Normalizes and appends; evicts the oldest entry once full.
  void push(std::span<const double> v);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t dim() const { return entries_.empty() ? 0 : entries_.front().size(); }
  const EuclideanVec& operator[](std::size_t i) const { return entries_[i]; }
  void clear() { entries_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<EuclideanVec> entries_;
};

/// 1 - cos(h, h_hat), in [0, 2].
double cosine_loss(std::span<const double> h, std::span<const double> h_hat);

double alpha_schedule(int epoch, const CurriculumSchedule& s);

/// alpha * poincare_loss + (1 - alpha) * cosine_loss.
double hysp_loss(const PoincarePoint& h, const PoincarePoint& h_hat, double alpha);

enum class Similarity {
  kCosine,
  /// Negative Poincare distance between the exp-mapped vectors.
  kPoincare,
};

/// InfoNCE with the positive in slot 0 and the queue as negatives.
double infonce_loss(std::span<const double> z, std::span<const double> z_hat,
                    const NegativeQueue& queue, Temperature tau,
                    Similarity sim = Similarity::kCosine,
                    geometry::Curvature c = geometry::Curvature{});

}  // namespace hysp::objectives
