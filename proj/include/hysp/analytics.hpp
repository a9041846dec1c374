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
#include <string>
#include <vector>

#include "hysp/data.hpp"
#include "hysp/model.hpp"

// Uncertainty studies on a trained twin model.
namespace hysp::analytics {

inline constexpr std::size_t kDefaultBins = 10;
inline constexpr int kDefaultViews = 5;

enum class Branch { kTarget, kOnline };
enum class Quantity { kCosineDistance, kGradNorm };

std::string to_string(Branch b);
std::string to_string(Quantity q);

struct UncertaintyRecord {
  std::uint32_t sample_id = 0;
  int class_id = 0;
  /// sqrt(c)|h_hat| (or |h| for the online branch), averaged over views; in [0, 1).
  double radius = 0.0;
  /// Always 1 - radius.
  double uncertainty = 1.0;
  /// 1 - cos(h, h_hat), averaged over views.
  double cosine_distance = 0.0;
  /// |riemannian_grad_poincare(h, h_hat)|, averaged over views.
  double grad_norm = 0.0;
};

struct RecordOptions {
  int n_views = kDefaultViews;
  std::uint64_t seed = 1;
  Branch branch = Branch::kTarget;
  data::AugmentationConfig augmentation;
};

/// One record per sample, in dataset order. View v of every sample uses the
/// augmentation streams of epoch v, so results do not depend on batching.
std::vector<UncertaintyRecord> collect_records(const model::TwinModel& twin, const data::Dataset& ds,
                                               double curvature, const RecordOptions& opts = {});

struct HistogramReport {
  Quantity quantity = Quantity::kCosineDistance;
  /// n_bins + 1 equal-width edges over the observed uncertainty range.
  std::vector<double> edges;
  /// Per-bin mean of the quantity; NaN for an empty bin.
  std::vector<double> mean;
  std::vector<std::size_t> count;

  std::size_t bins() const { return count.size(); }
  bool empty_bin(std::size_t i) const { return count[i] == 0; }
  std::size_t total() const;
};

/// Equal-width bins over [min, max] of the records' uncertainty; the last bin
/// is closed. A zero-width range puts every record in the first bin.
HistogramReport uncertainty_histogram(const std::vector<UncertaintyRecord>& records, Quantity quantity,
                                      std::size_t n_bins = kDefaultBins);

/// Spearman rank correlation with average ranks for ties. NaN for fewer than
/// two points or a constant input.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Spearman of bin index against bin mean over the occupied bins.
double histogram_trend(const HistogramReport& h);

struct ClassRadius {
  int class_id = 0;
  double median_radius = 0.0;
  std::size_t count = 0;
};

double median(std::vector<double> v);

/// Per-class median radius, descending; equal medians order by class id.
std::vector<ClassRadius> class_radius_ranking(const std::vector<UncertaintyRecord>& records);

struct ConfusionMatrix {
  /// Class ids in row/column order.
  std::vector<int> class_order;
  /// counts[i][j]: true class_order[i] predicted as class_order[j].
  std::vector<std::vector<std::size_t>> counts;
};

/// Rows and columns follow the ranking (descending median radius).
ConfusionMatrix sorted_confusion_matrix(const std::vector<int>& labels, const std::vector<int>& predicted,
                                        const std::vector<ClassRadius>& ranking);

// ---- emission -------------------------------------------------------------

/// Shortest round-trip decimal for a double; "nan" for NaN.
std::string format_number(double v);

std::string records_csv(const std::vector<UncertaintyRecord>& records);
std::string histogram_csv(const HistogramReport& h);
std::string ranking_csv(const std::vector<ClassRadius>& ranking);
std::string confusion_csv(const ConfusionMatrix& m);

/// Bar chart of per-bin means. Each bar carries its value in a data-value
/// attribute; a report with no records renders a "no data" note.
std::string histogram_svg(const HistogramReport& h, const std::string& title);
std::string ranking_svg(const std::vector<ClassRadius>& ranking, const std::string& title);
std::string confusion_svg(const ConfusionMatrix& m, const std::string& title);

/// Writes text to a file; throws IoError if that fails.
void write_text(const std::filesystem::path& path, const std::string& text);

struct AnalysisInputs {
  std::vector<UncertaintyRecord> records;
  std::vector<int> test_labels;
  std::vector<int> test_predicted;
  std::size_t n_bins = kDefaultBins;
  int n_views = kDefaultViews;
  Branch branch = Branch::kTarget;
};

struct AnalysisSummary {
  HistogramReport cosine;
  HistogramReport grad;
  std::vector<ClassRadius> ranking;
  ConfusionMatrix confusion;
  double cosine_trend = 0.0;
  double grad_trend = 0.0;
};

/// Builds every report, writes CSV + SVG pairs and an index.json into `dir`.
AnalysisSummary write_analysis(const AnalysisInputs& in, const std::filesystem::path& dir);

}  // namespace hysp::analytics
