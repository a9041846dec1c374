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


#include "hysp/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hysp::objectives {

namespace {

EuclideanVec normalized(std::span<const double> v, const char* what) {
  if (v.empty()) throw InvalidInput(std::string(what) + ": empty vector");
  if (!geometry::all_finite(v)) throw InvalidInput(std::string(what) + ": non-finite input");
  const double n = geometry::norm(v);
  if (n == 0.0) throw InvalidInput(std::string(what) + ": zero-norm vector");
  EuclideanVec out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

}  // namespace

CurriculumSchedule::CurriculumSchedule(int e1_, int e2_) : e1(e1_), e2(e2_) {
  if (e1 < 0 || e1 >= e2) {
    throw InvalidInput("curriculum schedule needs 0 <= e1 < e2");
  }
}

Temperature::Temperature(double t) : tau(t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("temperature must be positive");
}

NegativeQueue::NegativeQueue(std::size_t capacity) : capacity_(capacity) {}

void NegativeQueue::push(std::span<const double> v) {
  if (capacity_ == 0) return;
  if (!entries_.empty() && v.size() != dim()) {
    throw InvalidInput("NegativeQueue: dimension mismatch");
  }
  entries_.push_back(normalized(v, "NegativeQueue::push"));
  if (entries_.size() > capacity_) entries_.pop_front();
}

double cosine_loss(std::span<const double> h, std::span<const double> h_hat) {
  if (h.size() != h_hat.size()) throw InvalidInput("cosine_loss: dimension mismatch");
  const double nh = geometry::norm(h);
  const double ng = geometry::norm(h_hat);
  if (nh == 0.0 || ng == 0.0) throw InvalidInput("cosine_loss: zero-norm input");
  return 1.0 - geometry::dot(h, h_hat) / (nh * ng);
}

double alpha_schedule(int epoch, const CurriculumSchedule& s) {
  if (epoch <= s.e1) return 0.0;
  if (epoch >= s.e2) return 1.0;
  return static_cast<double>(epoch - s.e1) / static_cast<double>(s.e2 - s.e1);
}

double hysp_loss(const PoincarePoint& h, const PoincarePoint& h_hat, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("hysp_loss: alpha outside [0, 1]");
  // Skip the unused constituent so the degenerate weights are exact.
  if (alpha == 0.0) return cosine_loss(h.coords(), h_hat.coords());
  if (alpha == 1.0) return geometry::poincare_loss(h, h_hat);
  return alpha * geometry::poincare_loss(h, h_hat) +
         (1.0 - alpha) * cosine_loss(h.coords(), h_hat.coords());
}

double infonce_loss(std::span<const double> z, std::span<const double> z_hat,
                    const NegativeQueue& queue, Temperature tau, Similarity sim,
                    geometry::Curvature c) {
  const EuclideanVec q = normalized(z, "infonce_loss");
  const EuclideanVec k = normalized(z_hat, "infonce_loss");
  if (q.size() != k.size()) throw InvalidInput("infonce_loss: dimension mismatch");
  if (queue.size() > 0 && queue.dim() != q.size()) {
    throw InvalidInput("infonce_loss: queue dimension mismatch");
  }

  auto similarity = [&](const EuclideanVec& other) {
    if (sim == Similarity::kCosine) return geometry::dot(q, other);
    return -geometry::poincare_loss(geometry::exp_map0(q, c), geometry::exp_map0(other, c));
  };

  std::vector<double> logits;
  logits.reserve(queue.size() + 1);
  logits.push_back(similarity(k) / tau.tau);
  for (std::size_t i = 0; i < queue.size(); ++i) logits.push_back(similarity(queue[i]) / tau.tau);

  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - m);
  // -log softmax_0, clamped against rounding just below zero.
  return std::max(0.0, m + std::log(sum) - logits[0]);
}

}  // namespace hysp::objectives
