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
#include <cstdint>

namespace hysp {

/// What a random stream is used for; part of the stream identity.
enum class StreamPurpose : std::uint32_t {
  kGenerate = 1,
  kOnlineView = 2,
  kTargetView = 3,
  kShuffle = 4,
  kInit = 5,
  kSplit = 6,
  kProbe = 7,
};

/// Philox4x32-10 counter-based generator. A stream is fully identified by
/// (seed, sample_id, epoch, purpose), so draws never depend on the order in
/// which streams are consumed.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint32_t sample_id, std::uint32_t epoch, StreamPurpose purpose);

  std::uint32_t next_u32();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint32_t below(std::uint32_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                             std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace hysp
