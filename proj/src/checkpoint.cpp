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


#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "binio.hpp"
#include "hysp/errors.hpp"
#include "hysp/trainer.hpp"

namespace hysp::trainer {

namespace {

constexpr char kMagic[4] = {'H', 'Y', 'S', 'P'};
constexpr std::uint32_t kVersion = 1;

void write_blobs(std::ostream& os, const std::vector<std::string>& names, const std::vector<const ad::Tensor*>& ts) {
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(ts.size()));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    detail::write_string(os, names[i]);
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(ts[i]->rank()));
    for (std::size_t d : ts[i]->shape()) detail::write_le<std::uint64_t>(os, d);
    for (double v : ts[i]->vec()) detail::write_le(os, v);
  }
}

[[noreturn]] void corrupt(const std::string& what) { throw CorruptCheckpoint("checkpoint: " + what); }

template <typename T>
T need(std::istream& is, const char* field) {
  T v{};
  if (!detail::read_le(is, v)) corrupt(std::string("truncated at ") + field);
  return v;
}

std::vector<std::pair<std::string, ad::Tensor>> read_blobs(std::istream& is) {
  const auto count = need<std::uint32_t>(is, "blob count");
  if (count > 4096) corrupt("implausible blob count");
  std::vector<std::pair<std::string, ad::Tensor>> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name;
    if (!detail::read_string(is, name)) corrupt("truncated blob name");
    const auto rank = need<std::uint32_t>(is, "blob rank");
    if (rank > 8) corrupt("implausible rank for " + name);
    ad::Shape shape;
    std::uint64_t total = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      shape.push_back(static_cast<std::size_t>(need<std::uint64_t>(is, "blob shape")));
      total *= shape.back();
      if (total > (1ull << 28)) corrupt("implausible size for " + name);
    }
    std::vector<double> values(static_cast<std::size_t>(total));
    for (double& v : values) v = need<double>(is, "blob data");
    out.emplace_back(std::move(name), ad::Tensor(std::move(shape), std::move(values)));
  }
  return out;
}

model::ParamSet to_params(std::vector<std::pair<std::string, ad::Tensor>> blobs) {
  model::ParamSet ps;
  for (auto& [n, t] : blobs) ps.add(std::move(n), std::move(t));
  return ps;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  const auto& cfg = ck.twin.config;
  const auto& g = ck.twin.graph;
  std::ostringstream os(std::ios::binary);
  os.write(kMagic, 4);
  detail::write_le(os, kVersion);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.dim));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.joints));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.blocks));
  detail::write_le(os, ck.curvature);
  detail::write_le(os, ck.config_hash);
  detail::write_le<std::int32_t>(os, ck.epoch);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.in_channels));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.hidden));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.kernel));
  detail::write_le(os, cfg.ema_coefficient);
  detail::write_le(os, cfg.boundary_init_scale);

  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.edges.size()));
  for (auto [a, b] : g.edges) {
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(a));
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(b));
  }
  for (std::size_t m : g.mirror) detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(m));

  auto section = [&](const model::ParamSet& ps) {
    std::vector<std::string> names;
    std::vector<const ad::Tensor*> ts;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      names.push_back(ps.name(i));
      ts.push_back(&ps[i]);
    }
    write_blobs(os, names, ts);
  };
  section(ck.twin.online);
  section(ck.twin.target);
  if (ck.optimizer.velocity.size() != ck.twin.online.size())
    throw ShapeError("save_checkpoint: optimizer state does not match parameters");
  std::vector<std::string> names;
  std::vector<const ad::Tensor*> ts;
  for (std::size_t i = 0; i < ck.twin.online.size(); ++i) {
    names.push_back(ck.twin.online.name(i));
    ts.push_back(&ck.optimizer.velocity[i]);
  }
  write_blobs(os, names, ts);

  const std::string body = os.str();
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open checkpoint for writing: " + path.string());
  file.write(body.data(), static_cast<std::streamsize>(body.size()));
  detail::write_le(file, detail::fnv1a(body.data(), body.size()));
  if (!file) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<std::uint64_t> expected_config_hash,
                           std::ostream* warn) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open checkpoint: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  if (bytes.size() < 4 + 8 || !std::equal(kMagic, kMagic + 4, bytes.begin())) corrupt("bad magic");
  const std::string body = bytes.substr(0, bytes.size() - 8);
  std::istringstream trailer(bytes.substr(bytes.size() - 8));
  std::uint64_t checksum = 0;
  detail::read_le(trailer, checksum);

  std::istringstream is(body);
  is.ignore(4);
  const auto version = need<std::uint32_t>(is, "version");
  if (version != kVersion) corrupt("unsupported version " + std::to_string(version));
  Checkpoint ck;
  model::ModelConfig cfg;
  cfg.dim = need<std::uint32_t>(is, "D");
  cfg.joints = need<std::uint32_t>(is, "V");
  cfg.blocks = need<std::uint32_t>(is, "B");
  ck.curvature = need<double>(is, "curvature");
  ck.config_hash = need<std::uint64_t>(is, "config hash");
  ck.epoch = need<std::int32_t>(is, "epoch");
  cfg.in_channels = need<std::uint32_t>(is, "in_channels");
  cfg.hidden = need<std::uint32_t>(is, "hidden");
  cfg.kernel = need<std::uint32_t>(is, "kernel");
  cfg.ema_coefficient = need<double>(is, "ema");
  cfg.boundary_init_scale = need<double>(is, "boundary scale");

  const auto n_edges = need<std::uint32_t>(is, "edge count");
  if (n_edges > 4096 || cfg.joints > 4096) corrupt("implausible graph size");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::uint32_t e = 0; e < n_edges; ++e) {
    const auto a = need<std::uint32_t>(is, "edge");
    const auto b = need<std::uint32_t>(is, "edge");
    edges.emplace_back(a, b);
  }
  std::vector<std::size_t> mirror;
  for (std::size_t v = 0; v < cfg.joints; ++v) mirror.push_back(need<std::uint32_t>(is, "mirror"));

  auto online = read_blobs(is);
  auto target = read_blobs(is);
  auto velocity = read_blobs(is);
  if (is.peek() != std::char_traits<char>::eof()) corrupt("trailing bytes");
  if (checksum != detail::fnv1a(body.data(), body.size())) corrupt("checksum mismatch");

  try {
    cfg.validate();
    ck.twin.graph = SkeletonGraph::build(cfg.joints, std::move(edges), std::move(mirror));
  } catch (const InvalidInput& e) {
    corrupt(e.what());
  }
  ck.twin.config = cfg;
  ck.twin.online = to_params(std::move(online));
  ck.twin.target = to_params(std::move(target));
  if (velocity.size() != ck.twin.online.size()) corrupt("optimizer state does not match parameters");
  for (auto& [n, t] : velocity) ck.optimizer.velocity.push_back(std::move(t));

  if (expected_config_hash && *expected_config_hash != ck.config_hash && warn != nullptr)
    *warn << "warning: checkpoint " << path.string() << " was written under a different config (hash "
          << std::hex << ck.config_hash << " vs " << *expected_config_hash << std::dec << ")\n";
  return ck;
}

}  // namespace hysp::trainer
