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


#include "hysp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hysp/errors.hpp"
#include "hysp/geometry.hpp"
#include "hysp/objectives.hpp"
#include "hysp/rng.hpp"

namespace hysp::trainer {

namespace {

using data::SkeletonSequence;

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed, std::uint32_t epoch, StreamPurpose purpose) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  CounterRng rng(seed, 0, epoch, purpose);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(static_cast<std::uint32_t>(i))]);
  return idx;
}

std::span<const double> row(const ad::Tensor& t, std::size_t i) {
  const std::size_t d = t.dim(1);
  return t.data().subspan(i * d, d);
}

struct EpochTotals {
  double loss = 0.0;
  double h_norm = 0.0;
  double h_hat_norm = 0.0;
  double grad_norm = 0.0;
  std::size_t samples = 0;
};

/// Gradient of 1 - cos(h, g) with respect to h.
std::vector<double> cosine_grad(std::span<const double> h, std::span<const double> g) {
  const double nh = geometry::norm(h), ng = geometry::norm(g);
  const double cos = geometry::dot(h, g) / (nh * ng);
  std::vector<double> out(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) out[k] = -(g[k] / ng - cos * h[k] / nh) / nh;
  return out;
}

double hysp_grad_norm(std::span<const double> h, std::span<const double> g, double alpha, geometry::Curvature c) {
  std::vector<double> total(h.size(), 0.0);
  if (alpha > 0.0) {
    const geometry::PoincarePoint ph(geometry::EuclideanVec(h.begin(), h.end()), c);
    const geometry::PoincarePoint pg(geometry::EuclideanVec(g.begin(), g.end()), c);
    const auto rg = geometry::riemannian_grad_poincare(ph, pg);
    for (std::size_t k = 0; k < h.size(); ++k) total[k] += alpha * rg.vec[k];
  }
  if (alpha < 1.0) {
    const auto cg = cosine_grad(h, g);
    for (std::size_t k = 0; k < h.size(); ++k) total[k] += (1.0 - alpha) * cg[k];
  }
  return geometry::norm(total);
}

ad::Var mean_rows(ad::Var per_sample) {
  return ad::scale(ad::sum_all(per_sample), 1.0 / static_cast<double>(per_sample.shape()[0]));
}

void train_step(Checkpoint& ck, const TrainConfig& cfg, const std::vector<const SkeletonSequence*>& batch, int epoch,
                double alpha, objectives::NegativeQueue& queue, EpochTotals& totals) {
  const geometry::Curvature c(cfg.curvature);
  auto& twin = ck.twin;
  std::vector<SkeletonSequence> online_views, target_views;
  online_views.reserve(batch.size());
  target_views.reserve(batch.size());
  for (const auto* x : batch) {
    auto pair = data::make_view_pair(*x, cfg.augmentation, twin.graph, cfg.seed, static_cast<std::uint32_t>(epoch));
    online_views.push_back(std::move(pair.online));
    target_views.push_back(std::move(pair.target));
  }
  std::vector<const SkeletonSequence*> po, pt;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    po.push_back(&online_views[i]);
    pt.push_back(&target_views[i]);
  }

  ad::Tape tape;
  const model::BoundParams online = model::bind(tape, twin.online, true);
  const model::TwinOutputs out = model::twin_forward(tape, online, model::to_batch(po), model::to_batch(pt), twin, c);
  const std::size_t n = batch.size();

  ad::Var loss;
  ad::Tensor keys;
  if (cfg.with_negatives) {
    // MoCo-style: projector query against the target key and the queued keys.
    const ad::Var q = ad::normalize(out.z);
    const ad::Var k = ad::normalize(out.z_hat);
    keys = k.value();
    ad::Var logits = ad::reshape(ad::sum(ad::mul(q, k), 1), {n, 1});
    if (queue.size() > 0) {
      const std::size_t d = queue.dim(), m = queue.size();
      ad::Tensor bank({d, m});
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t r = 0; r < d; ++r) bank[r * m + j] = queue[j][r];
      logits = ad::concat({logits, ad::matmul(q, tape.constant(std::move(bank)))}, 1);
    }
    const std::vector<int> labels(n, 0);
    loss = ad::softmax_xent(ad::scale(logits, 1.0 / cfg.tau), labels);
  } else if (alpha == 1.0) {
    loss = mean_rows(ad::poincare_loss(out.h, out.h_hat, c));
  } else if (alpha == 0.0) {
    loss = mean_rows(ad::cosine_loss(out.h, out.h_hat));
  } else {
    loss = ad::add(ad::scale(mean_rows(ad::poincare_loss(out.h, out.h_hat, c)), alpha),
                   ad::scale(mean_rows(ad::cosine_loss(out.h, out.h_hat)), 1.0 - alpha));
  }
  const double loss_value = loss.value()[0];
  if (!std::isfinite(loss_value)) throw NumericalError("loss is not finite");
  tape.backward(loss);

  const ad::Tensor& h = out.h.value();
  const ad::Tensor& h_hat = out.h_hat.value();
  const ad::Tensor z_grad = cfg.with_negatives ? tape.grad(out.z.id()) : ad::Tensor();
  for (std::size_t i = 0; i < n; ++i) {
    totals.h_norm += geometry::norm(row(h, i));
    totals.h_hat_norm += geometry::norm(row(h_hat, i));
    totals.grad_norm += cfg.with_negatives ? static_cast<double>(n) * geometry::norm(row(z_grad, i))
                                           : hysp_grad_norm(row(h, i), row(h_hat, i), alpha, c);
  }
  totals.loss += loss_value * static_cast<double>(n);
  totals.samples += n;

  std::vector<ad::Tensor> grads;
  grads.reserve(online.vars.size());
  for (const auto& v : online.vars) grads.push_back(tape.grad(v.id()));
  sgd_step(twin.online, grads, ck.optimizer, cfg.lr, cfg.momentum, cfg.weight_decay);
  model::ema_update(twin, twin.config.ema_coefficient);

  if (cfg.with_negatives)
    for (std::size_t i = 0; i < n; ++i) queue.push(row(keys, i));
}

}  // namespace

Checkpoint initial_checkpoint(const TrainConfig& cfg) {
  cfg.validate();
  const SkeletonGraph graph = default_skeleton();
  Checkpoint ck;
  ck.twin = model::init_twin(cfg.model, graph, cfg.seed);
  for (std::size_t i = 0; i < ck.twin.online.size(); ++i)
    ck.optimizer.velocity.emplace_back(ck.twin.online[i].shape());
  ck.epoch = 0;
  ck.curvature = cfg.curvature;
  ck.config_hash = config_hash(cfg);
  return ck;
}

double effective_alpha(const TrainConfig& cfg, int epoch) {
  if (cfg.without_hyperbolic) return 0.0;
  if (cfg.without_curriculum) return 1.0;
  return objectives::alpha_schedule(epoch, cfg.schedule);
}

void sgd_step(model::ParamSet& params, const std::vector<ad::Tensor>& grads, OptimizerState& state, double lr,
              double momentum, double weight_decay) {
  if (grads.size() != params.size() || state.velocity.size() != params.size())
    throw ShapeError("sgd_step: gradient or state count does not match parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    ad::Tensor& p = params[i];
    ad::Tensor& v = state.velocity[i];
    const ad::Tensor& g = grads[i];
    if (g.shape() != p.shape() || v.shape() != p.shape())
      throw ShapeError("sgd_step: shape mismatch for " + params.name(i));
    for (std::size_t k = 0; k < p.size(); ++k) {
      v[k] = momentum * v[k] + (g[k] + weight_decay * p[k]);
      p[k] -= lr * v[k];
    }
  }
}

PretrainResult pretrain(const TrainConfig& cfg, const data::Dataset& train, std::optional<Checkpoint> resume,
                        std::optional<int> last_epoch) {
  cfg.validate();
  if (train.empty()) throw InvalidInput("pretrain: empty dataset");
  PretrainResult result{resume ? std::move(*resume) : initial_checkpoint(cfg), {}};
  Checkpoint& ck = result.checkpoint;
  const int last = last_epoch.value_or(cfg.epochs);
  objectives::NegativeQueue queue(std::max<std::size_t>(cfg.queue_capacity, 1));

  for (int epoch = ck.epoch + 1; epoch <= last; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const double alpha = effective_alpha(cfg, epoch);
    const auto order = shuffled(train.size(), cfg.seed, static_cast<std::uint32_t>(epoch), StreamPurpose::kShuffle);
    EpochTotals totals;
    std::size_t batch_index = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size, ++batch_index) {
      std::vector<const SkeletonSequence*> batch;
      for (std::size_t i = b; i < std::min(order.size(), b + cfg.batch_size); ++i) batch.push_back(&train[order[i]]);
      try {
        train_step(ck, cfg, batch, epoch, alpha, queue, totals);
      } catch (const NumericalError& e) {
        std::ostringstream msg;
        msg << "epoch " << epoch << " batch " << batch_index << ": " << e.what();
        if (totals.samples > 0) {
          const auto n = static_cast<double>(totals.samples);
          msg << " (running mean |h|=" << totals.h_norm / n << " |h_hat|=" << totals.h_hat_norm / n << ")";
        }
        throw NumericalError(msg.str());
      }
    }
    const auto n = static_cast<double>(totals.samples);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.metrics.push_back(
        {epoch, totals.loss / n, totals.h_norm / n, totals.h_hat_norm / n, totals.grad_norm / n, alpha, seconds});
    ck.epoch = epoch;
  }
  return result;
}

// ---- metrics -------------------------------------------------------------

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "epoch,loss,mean_h_norm,mean_h_hat_norm,mean_grad_norm,alpha\n" << std::setprecision(17);
  for (const auto& r : rows)
    os << r.epoch << ',' << r.loss << ',' << r.mean_h_norm << ',' << r.mean_h_hat_norm << ',' << r.mean_grad_norm
       << ',' << r.alpha << '\n';
  if (!os) throw IoError("failed writing " + path.string());
}

void write_timing_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "epoch,wall_seconds\n";
  for (const auto& r : rows) os << r.epoch << ',' << r.wall_seconds << '\n';
}

// ---- evaluation ----------------------------------------------------------

namespace {

void standardize_inplace(ad::Tensor& x, const std::vector<double>& mean, const std::vector<double>& inv_std) {
  const std::size_t d = x.dim(1);
  for (std::size_t i = 0; i < x.dim(0); ++i)
    for (std::size_t k = 0; k < d; ++k) x[i * d + k] = (x[i * d + k] - mean[k]) * inv_std[k];
}

void feature_stats(const ad::Tensor& x, std::vector<double>& mean, std::vector<double>& inv_std) {
  const std::size_t n = x.dim(0), d = x.dim(1);
  mean.assign(d, 0.0);
  inv_std.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) mean[k] += x[i * d + k] / static_cast<double>(n);
  for (std::size_t k = 0; k < d; ++k) {
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += std::pow(x[i * d + k] - mean[k], 2) / static_cast<double>(n);
    inv_std[k] = var > 1e-24 ? 1.0 / std::sqrt(var) : 0.0;
  }
}

ad::Tensor gather_rows(const ad::Tensor& x, const std::vector<std::size_t>& idx) {
  const std::size_t d = x.dim(1);
  std::vector<double> out;
  out.reserve(idx.size() * d);
  for (std::size_t i : idx) out.insert(out.end(), x.vec().begin() + static_cast<std::ptrdiff_t>(i * d),
                                       x.vec().begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
  return ad::Tensor({idx.size(), d}, std::move(out));
}

double probe_lr(const ProbeConfig& cfg, int epoch) {
  // Epochs are 0-based here.
  double lr = cfg.lr;
  if (epoch >= static_cast<int>(std::lround(0.6 * cfg.epochs))) lr *= 0.1;
  if (epoch >= static_cast<int>(std::lround(0.8 * cfg.epochs))) lr *= 0.1;
  return lr;
}

std::vector<int> argmax_rows(const ad::Tensor& logits) {
  const std::size_t k = logits.dim(1);
  std::vector<int> out;
  for (std::size_t i = 0; i < logits.dim(0); ++i) {
    const auto r = row(logits, i);
    out.push_back(static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin()));
  }
  (void)k;
  return out;
}

std::size_t class_count(const data::Dataset& a, const data::Dataset& b) {
  int k = -1;
  for (const auto* ds : {&a, &b})
    for (const auto& x : *ds) k = std::max(k, x.class_id);
  return static_cast<std::size_t>(k + 1);
}

ad::Tensor encode_chunked(const model::ParamSet& params, const data::Dataset& ds, const model::TwinModel& twin) {
  const std::size_t chunk = 64;
  std::vector<double> out;
  for (std::size_t b = 0; b < ds.size(); b += chunk) {
    std::vector<const SkeletonSequence*> ptrs;
    for (std::size_t i = b; i < std::min(ds.size(), b + chunk); ++i) ptrs.push_back(&ds[i]);
    const ad::Tensor y = model::encode(params, model::to_batch(ptrs), twin.graph, twin.config);
    out.insert(out.end(), y.vec().begin(), y.vec().end());
  }
  return ad::Tensor({ds.size(), twin.config.dim}, std::move(out));
}

data::Dataset labeled_subset(const data::Dataset& train, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidInput("probe: label_fraction must be in (0, 1]");
  if (fraction == 1.0) return train;
  return data::subset(train, data::stratified_split(train, 1.0 - fraction, seed ^ 0x5eed).train);
}

}  // namespace

std::vector<int> LinearClassifier::predict(const ad::Tensor& features) const {
  ad::Tensor x = features;
  standardize_inplace(x, mean, inv_std);
  ad::Tape tape;
  const ad::Var logits = ad::add(ad::matmul(tape.constant(std::move(x)), tape.constant(weight)), tape.constant(bias));
  return argmax_rows(logits.value());
}

LinearClassifier train_linear_classifier(const ad::Tensor& features, const std::vector<int>& labels,
                                         std::size_t num_classes, const ProbeConfig& cfg, std::uint64_t seed) {
  if (features.rank() != 2 || features.dim(0) != labels.size())
    throw ShapeError("linear classifier: features (" + ad::shape_str(features.shape()) + ") and labels disagree");
  if (labels.empty() || num_classes < 2) throw InvalidInput("linear classifier: need samples and >= 2 classes");
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) throw InvalidInput("linear classifier: label out of range");
  const std::size_t d = features.dim(1);
  LinearClassifier clf;
  feature_stats(features, clf.mean, clf.inv_std);
  ad::Tensor x = features;
  standardize_inplace(x, clf.mean, clf.inv_std);

  model::ParamSet params;
  params.add("w", ad::Tensor({d, num_classes}));
  params.add("b", ad::Tensor({num_classes}));
  OptimizerState state{{ad::Tensor({d, num_classes}), ad::Tensor({num_classes})}};
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = shuffled(labels.size(), seed, static_cast<std::uint32_t>(epoch), StreamPurpose::kProbe);
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(b),
                                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), b + cfg.batch_size)));
      std::vector<int> y;
      for (std::size_t i : idx) y.push_back(labels[i]);
      ad::Tape tape;
      const auto p = model::bind(tape, params, true);
      const ad::Var logits = ad::add(ad::matmul(tape.constant(gather_rows(x, idx)), p("w")), p("b"));
      tape.backward(ad::softmax_xent(logits, y));
      sgd_step(params, {tape.grad(p.vars[0].id()), tape.grad(p.vars[1].id())}, state, probe_lr(cfg, epoch),
               cfg.momentum, 0.0);
    }
  }
  clf.weight = params.get("w");
  clf.bias = params.get("b");
  return clf;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels) {
  if (predicted.size() != labels.size() || labels.empty()) throw InvalidInput("accuracy: size mismatch or empty");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += predicted[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

namespace {

/// Encoder and linear layer trained jointly; returns test predictions.
std::vector<int> finetune_and_predict(const model::TwinModel& twin, const data::Dataset& train,
                                      const data::Dataset& test, std::size_t num_classes, const ProbeConfig& pcfg,
                                      std::uint64_t seed) {
  const std::size_t d = twin.config.dim;
  model::ParamSet params;
  for (std::size_t i = 0; i < twin.online.size(); ++i)
    if (twin.online.name(i).rfind("encoder.", 0) == 0) params.add(twin.online.name(i), twin.online[i]);
  params.add("probe.w", ad::Tensor({d, num_classes}));
  params.add("probe.b", ad::Tensor({num_classes}));
  OptimizerState state;
  for (std::size_t i = 0; i < params.size(); ++i) state.velocity.emplace_back(params[i].shape());

  // Standardization is fixed from the initial features.
  std::vector<double> mean, inv_std;
  feature_stats(encode_chunked(params, train, twin), mean, inv_std);
  auto affine = [&](ad::Var f) {
    const std::size_t n = f.shape()[0];
    ad::Tensor s({n, d}), t({n, d});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        s[i * d + k] = inv_std[k];
        t[i * d + k] = -mean[k] * inv_std[k];
      }
    return ad::add(ad::mul(f, f.tape().constant(std::move(s))), f.tape().constant(std::move(t)));
  };

  for (int epoch = 0; epoch < pcfg.epochs; ++epoch) {
    const auto order = shuffled(train.size(), seed, static_cast<std::uint32_t>(epoch), StreamPurpose::kProbe);
    for (std::size_t b = 0; b < order.size(); b += pcfg.batch_size) {
      std::vector<const SkeletonSequence*> batch;
      std::vector<int> y;
      for (std::size_t i = b; i < std::min(order.size(), b + pcfg.batch_size); ++i) {
        batch.push_back(&train[order[i]]);
        y.push_back(train[order[i]].class_id);
      }
      ad::Tape tape;
      const auto p = model::bind(tape, params, true);
      const ad::Var f = model::encoder_forward(tape.constant(model::to_batch(batch)), p, twin.graph, twin.config);
      const ad::Var logits = ad::add(ad::matmul(affine(f), p("probe.w")), p("probe.b"));
      tape.backward(ad::softmax_xent(logits, y));
      std::vector<ad::Tensor> grads;
      for (const auto& v : p.vars) grads.push_back(tape.grad(v.id()));
      sgd_step(params, grads, state, probe_lr(pcfg, epoch), pcfg.momentum, 0.0);
    }
  }

  std::vector<int> predicted;
  const std::size_t chunk = 64;
  for (std::size_t b = 0; b < test.size(); b += chunk) {
    std::vector<const SkeletonSequence*> batch;
    for (std::size_t i = b; i < std::min(test.size(), b + chunk); ++i) batch.push_back(&test[i]);
    ad::Tape tape;
    const auto p = model::bind(tape, params, false);
    const ad::Var f = model::encoder_forward(tape.constant(model::to_batch(batch)), p, twin.graph, twin.config);
    const auto pred = argmax_rows(ad::add(ad::matmul(affine(f), p("probe.w")), p("probe.b")).value());
    predicted.insert(predicted.end(), pred.begin(), pred.end());
  }
  return predicted;
}

}  // namespace

ProbeResult linear_probe(const model::TwinModel& twin, const data::Dataset& train, const data::Dataset& test,
                         const TrainConfig& cfg, double label_fraction, bool finetune,
                         std::optional<std::size_t> batch_size) {
  if (!(label_fraction > 0.0 && label_fraction <= 1.0))
    throw InvalidInput("probe: label_fraction must be in (0, 1]");
  if (train.empty() || test.empty()) throw InvalidInput("probe: empty train or test set");
  ProbeConfig pcfg = cfg.probe;
  if (batch_size) pcfg.batch_size = *batch_size;
  const data::Dataset labeled = labeled_subset(train, label_fraction, cfg.seed);
  const std::size_t k = class_count(train, test);

  ProbeResult r;
  for (const auto& x : test) {
    r.labels.push_back(x.class_id);
    r.sample_ids.push_back(x.sample_id);
  }
  if (finetune) {
    r.predicted = finetune_and_predict(twin, labeled, test, k, pcfg, cfg.seed);
  } else {
    std::vector<int> y;
    for (const auto& x : labeled) y.push_back(x.class_id);
    const auto clf = train_linear_classifier(encode_chunked(twin.online, labeled, twin), y, k, pcfg, cfg.seed);
    r.predicted = clf.predict(encode_chunked(twin.online, test, twin));
  }
  r.accuracy = accuracy(r.predicted, r.labels);
  return r;
}

// ---- experiments ---------------------------------------------------------

std::vector<double> target_uncertainty(const model::TwinModel& twin, const data::Dataset& ds, double curvature) {
  const geometry::Curvature c(curvature);
  std::vector<double> u;
  const std::size_t chunk = 64;
  for (std::size_t b = 0; b < ds.size(); b += chunk) {
    std::vector<const SkeletonSequence*> batch;
    for (std::size_t i = b; i < std::min(ds.size(), b + chunk); ++i) batch.push_back(&ds[i]);
    ad::Tape tape;
    const auto p = model::bind(tape, twin.target, false);
    const ad::Var y = model::encoder_forward(tape.constant(model::to_batch(batch)), p, twin.graph, twin.config);
    const ad::Tensor h_hat = ad::exp_map0(model::head_forward(y, p, "projector."), c).value();
    for (std::size_t i = 0; i < batch.size(); ++i) u.push_back(1.0 - c.sqrt_c() * geometry::norm(row(h_hat, i)));
  }
  return u;
}

Halves split_by_uncertainty(const std::vector<double>& uncertainty, const data::Dataset& ds) {
  if (uncertainty.size() != ds.size()) throw InvalidInput("split: one uncertainty per sample is required");
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (uncertainty[a] != uncertainty[b]) return uncertainty[a] > uncertainty[b];
    return ds[a].sample_id < ds[b].sample_id;
  });
  const std::size_t n_hard = (idx.size() + 1) / 2;
  Halves h;
  h.hard.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_hard));
  h.easy.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_hard), idx.end());
  return h;
}

SplitReport hard_easy_split_experiment(const Checkpoint& full, const data::Dataset& train,
                                       const data::Dataset& test, const TrainConfig& cfg) {
  SplitReport r;
  r.halves = split_by_uncertainty(target_uncertainty(full.twin, train, full.curvature), train);
  r.full_accuracy = linear_probe(full.twin, train, test, cfg).accuracy;
  const auto hard = pretrain(cfg, data::subset(train, r.halves.hard));
  r.hard_accuracy = linear_probe(hard.checkpoint.twin, train, test, cfg).accuracy;
  const auto easy = pretrain(cfg, data::subset(train, r.halves.easy));
  r.easy_accuracy = linear_probe(easy.checkpoint.twin, train, test, cfg).accuracy;
  return r;
}

std::vector<AblationRow> ablation_grid(const TrainConfig& cfg, const data::Dataset& train, const data::Dataset& test,
                                       const PretrainResult* baseline) {
  std::vector<std::pair<std::string, TrainConfig>> variants;
  TrainConfig base = cfg;
  base.with_negatives = base.without_hyperbolic = base.without_curriculum = false;
  variants.push_back({"baseline", base});
  variants.push_back({"with_negatives", base});
  variants.back().second.with_negatives = true;
  variants.push_back({"without_hyperbolic", base});
  variants.back().second.without_hyperbolic = true;
  variants.push_back({"without_curriculum", base});
  variants.back().second.without_curriculum = true;

  std::vector<AblationRow> rows;
  for (const auto& [name, vcfg] : variants) {
    AblationRow row{name, 0.0, true, 0.0};
    try {
      const auto res = (baseline != nullptr && name == "baseline") ? *baseline : pretrain(vcfg, train);
      for (const auto& m : res.metrics) row.finite = row.finite && std::isfinite(m.loss);
      row.final_loss = res.metrics.empty() ? 0.0 : res.metrics.back().loss;
      row.probe_accuracy = linear_probe(res.checkpoint.twin, train, test, vcfg).accuracy;
    } catch (const NumericalError&) {
      row.finite = false;
      row.final_loss = std::nan("");
    }
    rows.push_back(row);
  }
  return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "variant,final_loss,finite,probe_accuracy\n" << std::setprecision(17);
  for (const auto& r : rows) os << r.name << ',' << r.final_loss << ',' << (r.finite ? 1 : 0) << ',' << r.probe_accuracy << '\n';
}

std::vector<BatchSweepRow> batch_size_sweep(const model::TwinModel& twin, const data::Dataset& train,
                                            const data::Dataset& test, const TrainConfig& cfg,
                                            const std::vector<std::size_t>& sizes) {
  std::vector<BatchSweepRow> rows;
  for (std::size_t b : sizes) rows.push_back({b, linear_probe(twin, train, test, cfg, 1.0, false, b).accuracy});
  return rows;
}

data::Dataset make_dataset(const TrainConfig& cfg) {
  const auto specs = data::amplitude_classes(cfg.data.amplitudes, default_skeleton(), cfg.data.frequency,
                                             cfg.data.noise_sigma, cfg.data.view_yaw_deg);
  return data::generate_dataset(specs, cfg.data.n_per_class, cfg.data.frames, cfg.data.seed);
}

}  // namespace hysp::trainer
