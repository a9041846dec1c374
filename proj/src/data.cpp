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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "binio.hpp"
#include "hysp/errors.hpp"

namespace hysp::data {

namespace {

constexpr char kDatasetMagic[4] = {'H', 'Y', 'S', 'D'};

SkeletonSequence like(const SkeletonSequence& x, std::size_t frames) {
  SkeletonSequence out;
  out.frames = frames;
  out.joints = x.joints;
  out.coords.assign(3 * frames * x.joints, 0.0);
  out.class_id = x.class_id;
  out.sample_id = x.sample_id;
  out.actor_scale = x.actor_scale;
  return out;
}

bool is_identity(const std::array<double, 9>& m) {
  return m == std::array<double, 9>{1, 0, 0, 0, 1, 0, 0, 0, 1};
}

std::array<double, 9> random_shear(double s, CounterRng& rng) {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c)
      if (r != c) m[r * 3 + c] = rng.uniform(-s, s);
  return m;
}

std::array<double, 9> random_rotation(double max_deg, CounterRng& rng) {
  double a[3] = {rng.normal(), rng.normal(), rng.normal()};
  const double n = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  const double max_rad = max_deg * std::numbers::pi / 180.0;
  const double theta = rng.uniform(-max_rad, max_rad);
  if (n == 0.0 || theta == 0.0) return {1, 0, 0, 0, 1, 0, 0, 0, 1};
  for (double& v : a) v /= n;
  // Rodrigues: R = cos I + sin [a]x + (1 - cos) a a^T.
  const double c = std::cos(theta), s = std::sin(theta), k = 1.0 - c;
  return {c + k * a[0] * a[0],        k * a[0] * a[1] - s * a[2], k * a[0] * a[2] + s * a[1],
          k * a[1] * a[0] + s * a[2], c + k * a[1] * a[1],        k * a[1] * a[2] - s * a[0],
          k * a[2] * a[0] - s * a[1], k * a[2] * a[1] + s * a[0], c + k * a[2] * a[2]};
}

SkeletonSequence random_crop_resize(const SkeletonSequence& x, std::pair<double, double> ratio,
                                    CounterRng& rng) {
  const double r = rng.uniform(ratio.first, ratio.second);
  auto length = static_cast<std::size_t>(std::lround(r * static_cast<double>(x.frames)));
  length = std::clamp<std::size_t>(length, 2, x.frames);
  const auto start = rng.below(static_cast<std::uint32_t>(x.frames - length + 1));
  if (length == x.frames) return x;
  return temporal_resize(temporal_crop(x, start, length), x.frames);
}

}  // namespace

void SkeletonSequence::validate() const {
  if (frames < 2) throw InvalidInput("sequence: need at least 2 frames");
  if (joints == 0) throw InvalidInput("sequence: no joints");
  if (coords.size() != 3 * frames * joints) throw ShapeError("sequence: coords size mismatch");
  for (double v : coords)
    if (!std::isfinite(v)) throw InvalidInput("sequence: non-finite coordinate");
}

void SyntheticClassSpec::validate(std::size_t joints) const {
  if (base_pose.size() != 3 * joints) throw InvalidInput("class spec: base_pose must be (3, V)");
  if (moving_joint_mask.size() != joints) throw InvalidInput("class spec: mask must have V entries");
  if (motion_axes.size() != 3 * joints) throw InvalidInput("class spec: motion_axes must be (3, V)");
  if (!(motion_amplitude >= 0.0) || !std::isfinite(motion_amplitude))
    throw InvalidInput("class spec: motion_amplitude must be >= 0");
  if (!(motion_frequency > 0.0) || !std::isfinite(motion_frequency))
    throw InvalidInput("class spec: motion_frequency must be > 0");
  if (!(noise_sigma >= 0.0)) throw InvalidInput("class spec: noise_sigma must be >= 0");
  if (!(view_yaw_deg >= 0.0 && view_yaw_deg <= 180.0))
    throw InvalidInput("class spec: view_yaw_deg must be in [0, 180]");
  if (motion_amplitude > 0.0 && std::none_of(moving_joint_mask.begin(), moving_joint_mask.end(),
                                             [](bool b) { return b; }))
    throw InvalidInput("class spec: a moving class needs at least one moving joint");
}

void AugmentationConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput(std::string("augmentation: ") + name + " not in [0, 1]");
  };
  prob(axis_mask_prob, "axis_mask_prob");
  prob(spatial_flip_prob, "spatial_flip_prob");
  prob(temporal_flip_prob, "temporal_flip_prob");
  if (!(shear >= 0.0)) throw InvalidInput("augmentation: shear must be >= 0");
  if (!(crop_ratio.first > 0.0 && crop_ratio.first <= crop_ratio.second && crop_ratio.second <= 1.0))
    throw InvalidInput("augmentation: crop ratio range must satisfy 0 < lo <= hi <= 1");
  if (!(rotate_max_deg >= 0.0 && rotate_max_deg <= 180.0))
    throw InvalidInput("augmentation: rotation must be in [0, 180] degrees");
  if (!(noise_sigma >= 0.0)) throw InvalidInput("augmentation: noise_sigma must be >= 0");
  if (blur_kernel.empty() || blur_kernel.size() % 2 == 0)
    throw InvalidInput("augmentation: blur kernel length must be odd");
  double total = 0.0;
  for (double k : blur_kernel) {
    if (!(k >= 0.0)) throw InvalidInput("augmentation: blur kernel weights must be >= 0");
    total += k;
  }
  if (!(total > 0.0)) throw InvalidInput("augmentation: blur kernel sums to zero");
}

AugmentationConfig AugmentationConfig::identity() {
  AugmentationConfig cfg;
  cfg.shear = 0.0;
  cfg.crop_ratio = {1.0, 1.0};
  cfg.rotate_max_deg = 0.0;
  cfg.axis_mask_prob = 0.0;
  cfg.spatial_flip_prob = 0.0;
  cfg.temporal_flip_prob = 0.0;
  cfg.noise_sigma = 0.0;
  cfg.blur_kernel = {1.0};
  return cfg;
}

std::vector<SyntheticClassSpec> amplitude_classes(const std::vector<double>& amplitudes,
                                                  const SkeletonGraph& graph, double frequency,
                                                  double noise_sigma, double view_yaw_deg) {
  const std::size_t V = graph.num_joints;
  std::vector<double> pose = default_rest_pose();
  if (pose.size() != 3 * V) throw InvalidInput("amplitude_classes: rest pose only exists for the default skeleton");
  // Elbows and hands swing vertically, feet step forward.
  std::vector<bool> mask(V, false);
  std::vector<double> axes(3 * V, 0.0);
  for (std::size_t v : {2u, 3u, 4u, 5u}) {
    mask[v] = true;
    axes[1 * V + v] = 1.0;
  }
  for (std::size_t v : {6u, 7u}) {
    mask[v] = true;
    axes[2 * V + v] = 1.0;
  }
  std::vector<SyntheticClassSpec> specs;
  for (std::size_t k = 0; k < amplitudes.size(); ++k) {
    SyntheticClassSpec s;
    s.class_id = static_cast<int>(k);
    s.base_pose = pose;
    s.motion_amplitude = amplitudes[k];
    s.motion_frequency = frequency;
    s.moving_joint_mask = mask;
    s.motion_axes = axes;
    s.noise_sigma = noise_sigma;
    s.view_yaw_deg = view_yaw_deg;
    specs.push_back(std::move(s));
  }
  return specs;
}

Dataset generate_dataset(const std::vector<SyntheticClassSpec>& specs, std::size_t n_per_class,
                         std::size_t frames, std::uint64_t seed) {
  if (specs.empty()) throw InvalidInput("generate_dataset: no class specs");
  if (frames < 2) throw InvalidInput("generate_dataset: need at least 2 frames");
  const std::size_t V = specs.front().base_pose.size() / 3;
  for (const auto& s : specs) s.validate(V);

  Dataset out;
  out.reserve(specs.size() * n_per_class);
  std::uint32_t sample_id = 0;
  for (const auto& spec : specs) {
    for (std::size_t i = 0; i < n_per_class; ++i, ++sample_id) {
      CounterRng rng(seed, sample_id, 0, StreamPurpose::kGenerate);
      SkeletonSequence x;
      x.frames = frames;
      x.joints = V;
      x.coords.assign(3 * frames * V, 0.0);
      x.class_id = spec.class_id;
      x.sample_id = sample_id;
      x.actor_scale = static_cast<double>(static_cast<float>(rng.uniform(0.8, 1.2)));
      const double phase = rng.uniform(-kPhaseJitter, kPhaseJitter);
      const double yaw_max = spec.view_yaw_deg * std::numbers::pi / 180.0;
      const double yaw = rng.uniform(-yaw_max, yaw_max);
      const double cy = std::cos(yaw), sy = std::sin(yaw);
      std::vector<double> p(3);
      for (std::size_t t = 0; t < frames; ++t) {
        const double tn = static_cast<double>(t) / static_cast<double>(frames - 1);
        const double wave = std::sin(2.0 * std::numbers::pi * spec.motion_frequency * tn + phase);
        for (std::size_t v = 0; v < V; ++v) {
          for (std::size_t c = 0; c < 3; ++c) {
            p[c] = spec.base_pose[c * V + v];
            if (spec.moving_joint_mask[v]) p[c] += spec.motion_amplitude * wave * spec.motion_axes[c * V + v];
          }
          // Yaw: rotate the lateral (x) and depth (z) axes.
          const double rx = cy * p[0] + sy * p[2], rz = -sy * p[0] + cy * p[2];
          const double rotated[3] = {rx, p[1], rz};
          for (std::size_t c = 0; c < 3; ++c) {
            double val = rotated[c] * x.actor_scale;
            if (spec.noise_sigma > 0.0) val += spec.noise_sigma * rng.normal();
            x.at(c, t, v) = static_cast<double>(static_cast<float>(val));
          }
        }
      }
      out.push_back(std::move(x));
    }
  }
  return out;
}

SkeletonSequence temporal_resize(const SkeletonSequence& x, std::size_t frames_out) {
  if (frames_out < 2) throw InvalidInput("temporal_resize: T_out must be >= 2");
  if (x.frames < 2) throw InvalidInput("temporal_resize: input needs at least 2 frames");
  if (frames_out == x.frames) return x;
  SkeletonSequence out = like(x, frames_out);
  const double span = static_cast<double>(x.frames - 1);
  for (std::size_t i = 0; i < frames_out; ++i) {
    const double pos = static_cast<double>(i) * span / static_cast<double>(frames_out - 1);
    auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 >= x.frames - 1) i0 = x.frames - 1;
    const double frac = pos - static_cast<double>(i0);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t v = 0; v < x.joints; ++v) {
        const double a = x.at(c, i0, v);
        out.at(c, i, v) = frac == 0.0 ? a : a + frac * (x.at(c, i0 + 1, v) - a);
      }
    }
  }
  return out;
}

SkeletonSequence apply_linear(const SkeletonSequence& x, const std::array<double, 9>& m) {
  if (is_identity(m)) return x;
  SkeletonSequence out = like(x, x.frames);
  for (std::size_t t = 0; t < x.frames; ++t) {
    for (std::size_t v = 0; v < x.joints; ++v) {
      const double p[3] = {x.at(0, t, v), x.at(1, t, v), x.at(2, t, v)};
      for (std::size_t r = 0; r < 3; ++r)
        out.at(r, t, v) = m[r * 3] * p[0] + m[r * 3 + 1] * p[1] + m[r * 3 + 2] * p[2];
    }
  }
  return out;
}

SkeletonSequence spatial_flip(const SkeletonSequence& x, const SkeletonGraph& graph) {
  if (graph.num_joints != x.joints) throw ShapeError("spatial_flip: joint count does not match the graph");
  SkeletonSequence out = like(x, x.frames);
  for (std::size_t c = 0; c < 3; ++c) {
    const double sign = c == 0 ? -1.0 : 1.0;  // mirror the lateral axis
    for (std::size_t t = 0; t < x.frames; ++t)
      for (std::size_t v = 0; v < x.joints; ++v) out.at(c, t, graph.mirror[v]) = sign * x.at(c, t, v);
  }
  return out;
}

SkeletonSequence axis_mask(const SkeletonSequence& x, std::size_t axis) {
  if (axis >= 3) throw InvalidInput("axis_mask: axis must be 0, 1 or 2");
  SkeletonSequence out = x;
  for (std::size_t t = 0; t < x.frames; ++t)
    for (std::size_t v = 0; v < x.joints; ++v) out.at(axis, t, v) = 0.0;
  return out;
}

SkeletonSequence temporal_crop(const SkeletonSequence& x, std::size_t start, std::size_t length) {
  if (length < 2 || start + length > x.frames) throw InvalidInput("temporal_crop: window out of range");
  SkeletonSequence out = like(x, length);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t t = 0; t < length; ++t)
      for (std::size_t v = 0; v < x.joints; ++v) out.at(c, t, v) = x.at(c, start + t, v);
  return out;
}

SkeletonSequence temporal_flip(const SkeletonSequence& x) {
  SkeletonSequence out = like(x, x.frames);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t t = 0; t < x.frames; ++t)
      for (std::size_t v = 0; v < x.joints; ++v) out.at(c, t, v) = x.at(c, x.frames - 1 - t, v);
  return out;
}

SkeletonSequence temporal_blur(const SkeletonSequence& x, const std::vector<double>& kernel) {
  if (kernel.empty() || kernel.size() % 2 == 0) throw InvalidInput("temporal_blur: kernel length must be odd");
  if (kernel.size() == 1) return x;
  double total = 0.0;
  for (double k : kernel) total += k;
  if (!(total > 0.0)) throw InvalidInput("temporal_blur: kernel sums to zero");
  const auto half = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto T = static_cast<std::ptrdiff_t>(x.frames);
  SkeletonSequence out = like(x, x.frames);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::ptrdiff_t t = 0; t < T; ++t) {
      for (std::size_t v = 0; v < x.joints; ++v) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -half; k <= half; ++k) {
          // Edge frames are replicated.
          const auto src = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(t + k, 0, T - 1));
          acc += kernel[static_cast<std::size_t>(k + half)] * x.at(c, src, v);
        }
        out.at(c, static_cast<std::size_t>(t), v) = acc / total;
      }
    }
  }
  return out;
}

SkeletonSequence augment_normal(const SkeletonSequence& x, const AugmentationConfig& cfg, CounterRng& rng) {
  x.validate();
  SkeletonSequence y = apply_linear(x, random_shear(cfg.shear, rng));
  return random_crop_resize(y, cfg.crop_ratio, rng);
}

SkeletonSequence augment_extreme(const SkeletonSequence& x, const AugmentationConfig& cfg,
                                 const SkeletonGraph& graph, CounterRng& rng) {
  x.validate();
  SkeletonSequence y = apply_linear(x, random_shear(cfg.shear, rng));
  if (rng.bernoulli(cfg.spatial_flip_prob)) y = spatial_flip(y, graph);
  y = apply_linear(y, random_rotation(cfg.rotate_max_deg, rng));
  if (rng.bernoulli(cfg.axis_mask_prob)) y = axis_mask(y, rng.below(3));
  y = random_crop_resize(y, cfg.crop_ratio, rng);
  if (rng.bernoulli(cfg.temporal_flip_prob)) y = temporal_flip(y);
  if (cfg.noise_sigma > 0.0)
    for (double& v : y.coords) v += cfg.noise_sigma * rng.normal();
  return temporal_blur(y, cfg.blur_kernel);
}

ViewPair make_view_pair(const SkeletonSequence& x, const AugmentationConfig& cfg, const SkeletonGraph& graph,
                        std::uint64_t seed, std::uint32_t epoch) {
  CounterRng online_rng(seed, x.sample_id, epoch, StreamPurpose::kOnlineView);
  CounterRng target_rng(seed, x.sample_id, epoch, StreamPurpose::kTargetView);
  return {augment_extreme(x, cfg, graph, online_rng), augment_normal(x, cfg, target_rng)};
}

void save_dataset(const Dataset& ds, const DatasetHeader& header, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open dataset cache for writing: " + path.string());
  os.write(kDatasetMagic, 4);
  detail::write_le(os, header.version);
  detail::write_le(os, header.joints);
  detail::write_le(os, header.frames);
  detail::write_le(os, header.classes);
  detail::write_le(os, header.seed);
  detail::write_le<std::uint64_t>(os, ds.size());
  for (const auto& x : ds) {
    if (x.joints != header.joints || x.frames != header.frames)
      throw ShapeError("save_dataset: sequence shape does not match header");
    detail::write_le<std::int32_t>(os, x.class_id);
    detail::write_le(os, x.sample_id);
    detail::write_le(os, x.actor_scale);
    for (double v : x.coords) detail::write_le(os, static_cast<float>(v));
  }
  if (!os) throw IoError("failed writing dataset cache: " + path.string());
}

std::pair<DatasetHeader, Dataset> load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open dataset cache: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kDatasetMagic))
    throw IoError("dataset cache has bad magic: " + path.string());
  DatasetHeader h;
  std::uint64_t count = 0;
  if (!detail::read_le(is, h.version) || !detail::read_le(is, h.joints) || !detail::read_le(is, h.frames) ||
      !detail::read_le(is, h.classes) || !detail::read_le(is, h.seed) || !detail::read_le(is, count))
    throw IoError("dataset cache header truncated: " + path.string());
  if (h.version != 1) throw IoError("unsupported dataset cache version " + std::to_string(h.version));
  if (h.joints == 0 || h.frames < 2) throw IoError("dataset cache header has invalid shape");
  Dataset ds;
  ds.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t i = 0; i < count; ++i) {
    SkeletonSequence x;
    x.frames = h.frames;
    x.joints = h.joints;
    std::int32_t cls = 0;
    if (!detail::read_le(is, cls) || !detail::read_le(is, x.sample_id) || !detail::read_le(is, x.actor_scale))
      throw IoError("dataset cache truncated at record " + std::to_string(i));
    x.class_id = cls;
    x.coords.resize(3 * x.frames * x.joints);
    for (double& v : x.coords) {
      float f = 0.0f;
      if (!detail::read_le(is, f)) throw IoError("dataset cache truncated at record " + std::to_string(i));
      v = f;
    }
    ds.push_back(std::move(x));
  }
  return {h, std::move(ds)};
}

Split stratified_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidInput("split: test fraction must be in (0, 1)");
  std::vector<int> classes;
  for (const auto& x : ds) classes.push_back(x.class_id);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  Split split;
  for (int k : classes) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds[i].class_id == k) idx.push_back(i);
    CounterRng rng(seed, static_cast<std::uint32_t>(k), 0, StreamPurpose::kSplit);
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(static_cast<std::uint32_t>(i))]);
    auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
    split.test.insert(split.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= ds.size()) throw InvalidInput("subset: index out of range");
    out.push_back(ds[i]);
  }
  return out;
}

}  // namespace hysp::data
