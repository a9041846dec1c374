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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace hysp::objectives {
namespace {

const geometry::Curvature kUnit{1.0};

TEST(CosineLoss, ReferenceValues) {
  const std::vector<double> g{0.3, -0.1, 0.2};
  EXPECT_NEAR(cosine_loss(std::vector<double>{0.6, -0.2, 0.4}, g), 0.0, 1e-15);
  EXPECT_NEAR(cosine_loss(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 3.0}), 1.0, 1e-15);
  EXPECT_NEAR(cosine_loss(std::vector<double>{-0.3, 0.1, -0.2}, g), 2.0, 1e-15);
}

TEST(CosineLoss, ZeroNormThrows) {
  EXPECT_THROW(cosine_loss(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 0.0}), InvalidInput);
}

TEST(AlphaSchedule, Branches) {
  const CurriculumSchedule s(50, 100);
  EXPECT_EQ(alpha_schedule(25, s), 0.0);
  EXPECT_EQ(alpha_schedule(50, s), 0.0);
  EXPECT_EQ(alpha_schedule(75, s), 0.5);
  EXPECT_EQ(alpha_schedule(100, s), 1.0);
  EXPECT_EQ(alpha_schedule(150, s), 1.0);
}

TEST(AlphaSchedule, MonotoneContinuousPiecewiseLinear) {
  const CurriculumSchedule s(6, 12);
  double prev = 0.0;
  for (int e = 0; e < 40; ++e) {
    const double a = alpha_schedule(e, s);
    EXPECT_GE(a, prev);
    EXPECT_LE(a - prev, 1.0 / 6.0 + 1e-15);
    prev = a;
  }
}

TEST(CurriculumSchedule, RejectsBadOrder) {
  EXPECT_THROW(CurriculumSchedule(10, 10), InvalidInput);
  EXPECT_THROW(CurriculumSchedule(-1, 10), InvalidInput);
}

TEST(HyspLoss, DegenerateWeights) {
  const geometry::PoincarePoint h({0.1, 0.2, -0.3}, kUnit);
  const geometry::PoincarePoint g({-0.4, 0.1, 0.5}, kUnit);
  EXPECT_EQ(hysp_loss(h, g, 0.0), cosine_loss(h.coords(), g.coords()));
  EXPECT_EQ(hysp_loss(h, g, 1.0), geometry::poincare_loss(h, g));
  EXPECT_THROW(hysp_loss(h, g, 1.5), InvalidInput);
}

TEST(HyspLoss, HalfIsMeanOfConstituents) {
  const geometry::PoincarePoint h({1e-3, 0.0}, kUnit);
  const geometry::PoincarePoint g({0.3, 0.4}, kUnit);
  const double cosv = 1.0 - 0.3 / 0.5;
  const double poin = std::acosh(1.0 + 2.0 * (std::pow(0.3 - 1e-3, 2) + 0.16) / ((1.0 - 1e-6) * 0.75));
  EXPECT_NEAR(hysp_loss(h, g, 0.5), 0.5 * (cosv + poin), 1e-14);
}

TEST(HyspLoss, AffineInAlpha) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.5, 0.5), a(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const geometry::PoincarePoint h({u(rng), u(rng), u(rng)}, kUnit);
    const geometry::PoincarePoint g({u(rng), u(rng), u(rng)}, kUnit);
    const double a1 = a(rng), a2 = a(rng), t = a(rng);
    const double mixed = hysp_loss(h, g, t * a1 + (1 - t) * a2);
    EXPECT_NEAR(mixed, t * hysp_loss(h, g, a1) + (1 - t) * hysp_loss(h, g, a2), 1e-12);
  }
}

TEST(HyspLoss, CosineTermUnchangedByExpMap) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> p(8), z(8);
    for (auto& x : p) x = n(rng);
    for (auto& x : z) x = n(rng);
    const auto h = geometry::exp_map0(p, kUnit);
    const auto g = geometry::exp_map0(z, kUnit);
    EXPECT_NEAR(cosine_loss(h.coords(), g.coords()), cosine_loss(p, z), 1e-10);
  }
}

TEST(NegativeQueue, FifoEvictionAndUnitNorm) {
  NegativeQueue q(2);
  q.push(std::vector<double>{2.0, 0.0});
  q.push(std::vector<double>{0.0, 3.0});
  q.push(std::vector<double>{-4.0, 0.0});
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q[0], (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(q[1], (std::vector<double>{-1.0, 0.0}));
}

TEST(InfoNce, EmptyQueueIsZero) {
  NegativeQueue q(4);
  EXPECT_EQ(infonce_loss(std::vector<double>{1.0, 2.0}, std::vector<double>{-3.0, 0.5}, q, Temperature(0.07)),
            0.0);
}

TEST(InfoNce, TiedNegativeGivesLog2) {
  NegativeQueue q(4);
  const std::vector<double> z{1.0, 0.0}, k{0.6, 0.8};
  q.push(std::vector<double>{0.6, -0.8});  // same similarity to z as k
  EXPECT_NEAR(infonce_loss(z, k, q, Temperature(0.2)), std::log(2.0), 1e-14);
}

TEST(InfoNce, ReferenceValue) {
  NegativeQueue q(4);
  q.push(std::vector<double>{0.0, 1.0});
  // -log(e / (e + 1)) from a 30-digit evaluation.
  EXPECT_NEAR(infonce_loss(std::vector<double>{1.0, 0.0}, std::vector<double>{2.0, 0.0}, q, Temperature(1.0)),
              0.313261687518222834, 1e-15);
}

TEST(InfoNce, MonotoneInSimilarities) {
  NegativeQueue q(8);
  q.push(std::vector<double>{0.0, 1.0, 0.0});
  q.push(std::vector<double>{0.0, 0.0, 1.0});
  const std::vector<double> z{1.0, 0.0, 0.0};
  double prev = std::numeric_limits<double>::infinity();
  for (double t = 0.0; t < 1.5; t += 0.1) {
    const double l = infonce_loss(z, std::vector<double>{std::cos(t), std::sin(t), 0.0}, q, Temperature(0.5));
    if (t > 0.0) EXPECT_GT(l, prev - 1e-15);
    prev = l;
  }
  const std::vector<double> k{0.8, 0.6, 0.0};
  NegativeQueue near(1), far(1);
  near.push(std::vector<double>{0.9, 0.0, 0.1});
  far.push(std::vector<double>{0.1, 0.0, 0.9});
  EXPECT_GT(infonce_loss(z, k, near, Temperature(0.5)), infonce_loss(z, k, far, Temperature(0.5)));
}

TEST(InfoNce, PoincareVariantMatchesWhenTied) {
  NegativeQueue q(4);
  const std::vector<double> z{1.0, 0.0}, k{0.6, 0.8};
  q.push(std::vector<double>{0.6, -0.8});
  EXPECT_NEAR(infonce_loss(z, k, q, Temperature(0.5), Similarity::kPoincare), std::log(2.0), 1e-12);
}

TEST(InfoNce, RejectsEmptyVectors) {
  NegativeQueue q(4);
  EXPECT_THROW(infonce_loss(std::vector<double>{}, std::vector<double>{}, q, Temperature(0.1)), InvalidInput);
}

}  // namespace
}  // namespace hysp::objectives
