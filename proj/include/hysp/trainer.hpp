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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hysp/config.hpp"
#include "hysp/data.hpp"
#include "hysp/model.hpp"

namespace hysp::trainer {

struct MetricsRow {
  int epoch = 0;
  double loss = 0.0;
  double mean_h_norm = 0.0;
  double mean_h_hat_norm = 0.0;
  /// Mean per-sample norm of the loss gradient at h; the hyperbolic term
  /// uses the Riemannian gradient.
  double mean_grad_norm = 0.0;
  double alpha = 0.0;
  double wall_seconds = 0.0;
};

/// Momentum buffers aligned with the online parameters.
struct OptimizerState {
  std::vector<ad::Tensor> velocity;
};

struct Checkpoint {
  model::TwinModel twin;
  OptimizerState optimizer;
  /// Last completed epoch; 0 for a fresh initialization.
  int epoch = 0;
  double curvature = 1.0;
  std::uint64_t config_hash = 0;
};

struct PretrainResult {
  Checkpoint checkpoint;
  std::vector<MetricsRow> metrics;
};

/// Fresh model and zero momentum for a config.
Checkpoint initial_checkpoint(const TrainConfig& cfg);

/// Loss weight on the hyperbolic term for an epoch under the config's ablation flags.
double effective_alpha(const TrainConfig& cfg, int epoch);

/// Trains epochs ckpt.epoch + 1 .. last_epoch (cfg.epochs by default) on `train`.
PretrainResult pretrain(const TrainConfig& cfg, const data::Dataset& train, std::optional<Checkpoint> resume = {},
                        std::optional<int> last_epoch = {});

/// SGD with momentum and L2 weight decay: v = mu v + (g + wd theta); theta -= lr v.
void sgd_step(model::ParamSet& params, const std::vector<ad::Tensor>& grads, OptimizerState& state, double lr,
              double momentum, double weight_decay);

// ---- metrics -------------------------------------------------------------

/// Deterministic columns only (no wall time).
void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);
void write_timing_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);

// ---- checkpoints ---------------------------------------------------------

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws CorruptCheckpoint on bad magic, truncation or a checksum mismatch.
/// A differing config hash only prints a warning to `warn`.
Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<std::uint64_t> expected_config_hash = {},
                           std::ostream* warn = nullptr);

// ---- evaluation ----------------------------------------------------------

/// Multinomial logistic regression weights (D, K) and bias (K).
struct LinearClassifier {
  ad::Tensor weight;
  ad::Tensor bias;
  /// Per-feature standardization taken from the training features.
  std::vector<double> mean;
  std::vector<double> inv_std;

  std::vector<int> predict(const ad::Tensor& features) const;
};

/// Softmax cross-entropy, minibatch SGD with momentum and no weight decay; the
/// learning rate drops by 10x at 60% and 80% of the epochs.
LinearClassifier train_linear_classifier(const ad::Tensor& features, const std::vector<int>& labels,
                                         std::size_t num_classes, const ProbeConfig& cfg, std::uint64_t seed);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels);

struct ProbeResult {
  double accuracy = 0.0;
  std::vector<int> predicted;
  std::vector<int> labels;
  std::vector<std::uint32_t> sample_ids;
};

/// Frozen-encoder linear protocol when finetune is false; otherwise the
/// encoder is trained together with the linear layer. label_fraction of each
/// training class is used, and accuracy is top-1 on `test`.
ProbeResult linear_probe(const model::TwinModel& twin, const data::Dataset& train, const data::Dataset& test,
                         const TrainConfig& cfg, double label_fraction = 1.0, bool finetune = false,
                         std::optional<std::size_t> batch_size = {});

// ---- experiments ---------------------------------------------------------

/// Uncertainty 1 - sqrt(c) |h_hat| of each sample's un-augmented target embedding.
std::vector<double> target_uncertainty(const model::TwinModel& twin, const data::Dataset& ds, double curvature);

struct Halves {
  std::vector<std::size_t> hard;
  std::vector<std::size_t> easy;
};
/// Descending uncertainty, ties broken by sample id; the hard half takes the
/// extra sample of an odd count.
Halves split_by_uncertainty(const std::vector<double>& uncertainty, const data::Dataset& ds);

struct SplitReport {
  double full_accuracy = 0.0;
  double hard_accuracy = 0.0;
  double easy_accuracy = 0.0;
  Halves halves;
};

SplitReport hard_easy_split_experiment(const Checkpoint& full, const data::Dataset& train,
                                       const data::Dataset& test, const TrainConfig& cfg);

struct AblationRow {
  std::string name;
  double final_loss = 0.0;
  bool finite = true;
  double probe_accuracy = 0.0;
};

/// Baseline, with negatives, without hyperbolic, without curriculum. A baseline
/// run already trained with the ablation flags cleared may be passed in.
std::vector<AblationRow> ablation_grid(const TrainConfig& cfg, const data::Dataset& train, const data::Dataset& test,
                                       const PretrainResult* baseline = nullptr);
void write_ablation_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path);

struct BatchSweepRow {
  std::size_t batch_size = 0;
  double accuracy = 0.0;
};
std::vector<BatchSweepRow> batch_size_sweep(const model::TwinModel& twin, const data::Dataset& train,
                                            const data::Dataset& test, const TrainConfig& cfg,
                                            const std::vector<std::size_t>& sizes = {512, 256, 128, 64, 32});

/// Dataset from a config's data section.
data::Dataset make_dataset(const TrainConfig& cfg);

}  // namespace hysp::trainer
