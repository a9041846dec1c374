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


#include "hysp/analytics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "hysp/errors.hpp"

namespace hysp::analytics {
namespace {

const SkeletonGraph kGraph = default_skeleton();

data::Dataset small_data() {
  return data::generate_dataset(data::amplitude_classes({0.05, 0.3, 1.0}, kGraph, 1.0, 0.01), 3, 12, 4);
}

model::ModelConfig small_model() {
  model::ModelConfig m;
  m.hidden = 8;
  m.dim = 8;
  return m;
}

UncertaintyRecord rec(double u, double cos, double grad, int cls = 0, std::uint32_t id = 0) {
  return {id, cls, 1.0 - u, u, cos, grad};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::vector<std::string> svg_values(const std::string& svg) {
  std::vector<std::string> out;
  const std::regex re("data-value=\"([^\"]*)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it)
    out.push_back((*it)[1]);
  return out;
}

// ---- records ----------------------------------------------------------------

TEST(Records, DeterministicAndUncertaintyIsOneMinusRadius) {
  const auto twin = model::init_twin(small_model(), kGraph, 3);
  const auto ds = small_data();
  RecordOptions opts;
  opts.n_views = 1;
  const auto a = collect_records(twin, ds, 1.0, opts);
  const auto b = collect_records(twin, ds, 1.0, opts);
  ASSERT_EQ(a.size(), ds.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].radius, b[i].radius);
    EXPECT_EQ(a[i].cosine_distance, b[i].cosine_distance);
    EXPECT_EQ(a[i].grad_norm, b[i].grad_norm);
    EXPECT_EQ(a[i].uncertainty, 1.0 - a[i].radius);
    EXPECT_GE(a[i].radius, 0.0);
    EXPECT_LT(a[i].radius, 1.0);
    EXPECT_EQ(a[i].sample_id, ds[i].sample_id);
    EXPECT_EQ(a[i].class_id, ds[i].class_id);
  }
}

TEST(Records, CollectionLeavesModelUntouched) {
  const auto twin = model::init_twin(small_model(), kGraph, 3);
  const auto online = twin.online.hash(), target = twin.target.hash();
  collect_records(twin, small_data(), 1.0);
  EXPECT_EQ(twin.online.hash(), online);
  EXPECT_EQ(twin.target.hash(), target);
}

TEST(Records, OnlineBranchFlagChangesRadiusSource) {
  const auto twin = model::init_twin(small_model(), kGraph, 3);
  RecordOptions opts;
  opts.n_views = 2;
  const auto t = collect_records(twin, small_data(), 1.0, opts);
  opts.branch = Branch::kOnline;
  const auto o = collect_records(twin, small_data(), 1.0, opts);
  bool differs = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    differs |= t[i].radius != o[i].radius;
    EXPECT_EQ(t[i].cosine_distance, o[i].cosine_distance);
  }
  EXPECT_TRUE(differs);
}

TEST(Records, BoundaryInitPutsAllRadiiNearEdge) {
  model::ModelConfig m = small_model();
  m.boundary_init_scale = 100.0;
  const auto twin = model::init_twin(m, kGraph, 3);
  for (const auto& r : collect_records(twin, small_data(), 1.0)) EXPECT_GT(r.radius, 0.99);
}

TEST(Records, RejectsEmptyDatasetAndZeroViews) {
  const auto twin = model::init_twin(small_model(), kGraph, 3);
  EXPECT_THROW(collect_records(twin, {}, 1.0), InvalidInput);
  RecordOptions opts;
  opts.n_views = 0;
  EXPECT_THROW(collect_records(twin, small_data(), 1.0, opts), InvalidInput);
}

// ---- histogram ------------------------------------------------------------

TEST(Histogram, IdenticalRecordsFillOneBin) {
  const std::vector<UncertaintyRecord> rs(7, rec(0.4, 0.25, 3.0));
  const auto h = uncertainty_histogram(rs, Quantity::kCosineDistance, 5);
  std::size_t occupied = 0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (h.empty_bin(i)) {
      EXPECT_TRUE(std::isnan(h.mean[i]));
    } else {
      ++occupied;
      EXPECT_EQ(h.mean[i], 0.25);
      EXPECT_EQ(h.count[i], 7u);
    }
  }
  EXPECT_EQ(occupied, 1u);
}

TEST(Histogram, CountsSumToRecordsAndEdgesSpanRange) {
  std::vector<UncertaintyRecord> rs;
  for (int i = 0; i < 53; ++i) rs.push_back(rec(0.1 + 0.013 * (i % 17), 0.01 * i, 1.0 / (1 + i)));
  for (std::size_t bins : {2u, 3u, 10u, 40u}) {
    const auto h = uncertainty_histogram(rs, Quantity::kGradNorm, bins);
    EXPECT_EQ(h.total(), rs.size());
    ASSERT_EQ(h.edges.size(), bins + 1);
    EXPECT_DOUBLE_EQ(h.edges.front(), 0.1);
    EXPECT_DOUBLE_EQ(h.edges.back(), 0.1 + 0.013 * 16);
    for (std::size_t i = 1; i < h.edges.size(); ++i) EXPECT_GT(h.edges[i], h.edges[i - 1]);
  }
}

TEST(Histogram, RejectsTooFewBinsAndNoRecords) {
  EXPECT_THROW(uncertainty_histogram({rec(0.1, 0, 0)}, Quantity::kGradNorm, 1), InvalidInput);
  EXPECT_THROW(uncertainty_histogram({}, Quantity::kGradNorm, 10), InvalidInput);
}

TEST(Histogram, MeansRecomputableFromRecordsCsv) {
  std::vector<UncertaintyRecord> rs;
  for (int i = 0; i < 40; ++i)
    rs.push_back(rec(std::fmod(0.731 * i, 1.0) * 0.9, std::sin(0.3 * i) + 1.0, std::cos(0.2 * i) + 2.0, i % 3, i));
  const auto h = uncertainty_histogram(rs, Quantity::kCosineDistance, 6);
  const auto rows = parse_csv(records_csv(rs));
  ASSERT_EQ(rows.size(), rs.size() + 1);
  std::vector<double> sum(6, 0.0);
  std::vector<int> n(6, 0);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double u = std::stod(rows[r][3]), cd = std::stod(rows[r][4]);
    std::size_t bin = 0;
    while (bin + 1 < 6 && u >= h.edges[bin + 1]) ++bin;
    sum[bin] += cd;
    ++n[bin];
  }
  for (std::size_t b = 0; b < 6; ++b) {
    EXPECT_EQ(static_cast<std::size_t>(n[b]), h.count[b]);
    if (n[b]) EXPECT_NEAR(sum[b] / n[b], h.mean[b], 1e-12);
  }
}

// ---- spearman -------------------------------------------------------------

TEST(Spearman, MatchesReferenceValues) {
  EXPECT_NEAR(spearman({1, 2, 3, 4, 5}, {5, 6, 7, 8, 7}), 0.8207826816681233, 1e-12);
  EXPECT_NEAR(spearman({0.3, 0.1, 0.4, 0.1, 0.5, 0.9}, {2, 7, 1, 8, 2, 8}), -0.1343433226559697, 1e-12);
}

TEST(Spearman, MonotoneMapsGiveUnitCorrelation) {
  std::vector<double> x, up, down;
  for (int i = 0; i < 20; ++i) {
    x.push_back(0.37 * i - 2.0);
    up.push_back(std::exp(x.back()));
    down.push_back(-x.back() * x.back() * x.back());
  }
  EXPECT_DOUBLE_EQ(spearman(x, up), 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, down), -1.0);
  EXPECT_TRUE(std::isnan(spearman({1.0}, {2.0})));
  EXPECT_TRUE(std::isnan(spearman({1, 2, 3}, {4, 4, 4})));
  EXPECT_THROW(spearman({1, 2}, {1}), InvalidInput);
}

TEST(Spearman, HistogramTrendSkipsEmptyBins) {
  HistogramReport h;
  h.edges = {0, 1, 2, 3, 4};
  h.count = {2, 0, 1, 3};
  h.mean = {0.1, std::nan(""), 0.2, 0.4};
  EXPECT_DOUBLE_EQ(histogram_trend(h), 1.0);
}

// ---- ranking --------------------------------------------------------------

TEST(Ranking, SingleClassGivesItsMedian) {
  const std::vector<UncertaintyRecord> rs{rec(0.9, 0, 0, 4), rec(0.5, 0, 0, 4), rec(0.7, 0, 0, 4), rec(0.2, 0, 0, 4)};
  const auto r = class_radius_ranking(rs);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].class_id, 4);
  EXPECT_DOUBLE_EQ(r[0].median_radius, 0.5 * ((1.0 - 0.7) + (1.0 - 0.5)));
  EXPECT_EQ(r[0].count, 4u);
}

TEST(Ranking, DescendingByMedianAndInvariantToDuplication) {
  std::vector<UncertaintyRecord> rs;
  for (int i = 0; i < 15; ++i) rs.push_back(rec(0.05 * i, 0, 0, i % 3));
  auto doubled = rs;
  doubled.insert(doubled.end(), rs.begin(), rs.end());
  const auto a = class_radius_ranking(rs), b = class_radius_ranking(doubled);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_GE(a[i - 1].median_radius, a[i].median_radius);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].class_id, b[i].class_id);
    EXPECT_EQ(a[i].median_radius, b[i].median_radius);
  }
  EXPECT_EQ(a.front().class_id, 0);
}

TEST(Median, OddEvenAndEmpty) {
  EXPECT_EQ(median({3, 1, 2}), 2);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_THROW(median({}), InvalidInput);
}

// ---- confusion ------------------------------------------------------------

TEST(Confusion, PerfectClassifierIsDiagonalUnderAnyOrder) {
  const std::vector<int> labels{0, 1, 2, 2, 1, 0, 0};
  const std::vector<ClassRadius> orders[] = {{{0, .9, 1}, {1, .5, 1}, {2, .1, 1}}, {{2, .9, 1}, {0, .5, 1}, {1, .1, 1}}};
  for (const auto& order : orders) {
    const auto m = sorted_confusion_matrix(labels, labels, order);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        if (i != j) EXPECT_EQ(m.counts[i][j], 0u);
  }
}

TEST(Confusion, RowSumsEqualClassCountsAndOrderFollowsRanking) {
  const std::vector<int> labels{0, 0, 0, 1, 1, 2};
  const std::vector<int> pred{0, 1, 2, 1, 0, 2};
  const auto m = sorted_confusion_matrix(labels, pred, {{1, .8, 2}, {2, .6, 1}, {0, .2, 3}});
  EXPECT_EQ(m.class_order, (std::vector<int>{1, 2, 0}));
  const std::map<int, std::size_t> expected{{0, 3}, {1, 2}, {2, 1}};
  for (std::size_t i = 0; i < 3; ++i) {
    std::size_t s = 0;
    for (std::size_t n : m.counts[i]) s += n;
    EXPECT_EQ(s, expected.at(m.class_order[i]));
  }
  EXPECT_EQ(m.counts[2][0], 1u);  // true 0 predicted 1
}

TEST(Confusion, UnknownClassThrows) {
  EXPECT_THROW(sorted_confusion_matrix({0, 5}, {0, 0}, {{0, .5, 1}}), InvalidInput);
  EXPECT_THROW(sorted_confusion_matrix({0}, {0, 0}, {{0, .5, 1}}), InvalidInput);
}

// ---- emission -------------------------------------------------------------

TEST(Emission, EmptyHistogramRendersNoDataSvg) {
  const std::string svg = histogram_svg(HistogramReport{}, "empty");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("no data"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Emission, CsvAndSvgCarryIdenticalValues) {
  std::vector<UncertaintyRecord> rs;
  for (int i = 0; i < 25; ++i) rs.push_back(rec(0.03 * (i % 11), 0.1 + 0.07 * i, 1.0, i % 2, i));
  const auto h = uncertainty_histogram(rs, Quantity::kCosineDistance, 8);
  const auto rows = parse_csv(histogram_csv(h));
  const auto values = svg_values(histogram_svg(h, "t"));
  ASSERT_EQ(values.size(), h.bins());
  for (std::size_t i = 0; i < h.bins(); ++i) {
    EXPECT_EQ(rows[i + 1][4], values[i]);
    EXPECT_EQ(rows[i + 1][5], h.empty_bin(i) ? "1" : "0");
  }

  const auto m = sorted_confusion_matrix({0, 1, 1}, {1, 1, 0}, {{1, .7, 2}, {0, .3, 1}});
  const auto crow = parse_csv(confusion_csv(m));
  const auto cval = svg_values(confusion_svg(m, "c"));
  ASSERT_EQ(cval.size(), 4u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(crow[i + 1][j + 1], cval[i * 2 + j]);
}

TEST(Emission, NumbersRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, 6.02e23, -2.5e-300, 0.0}) EXPECT_EQ(std::stod(format_number(v)), v);
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Emission, AnalysisDirectoryIsDeterministic) {
  std::vector<UncertaintyRecord> rs;
  for (int i = 0; i < 30; ++i) rs.push_back(rec(0.02 * i, 0.01 * i, 2.0 - 0.03 * i, i % 3, i));
  AnalysisInputs in;
  in.records = rs;
  in.test_labels = {0, 1, 2, 2};
  in.test_predicted = {0, 2, 2, 1};
  const auto base = std::filesystem::path(::testing::TempDir());
  const auto s1 = write_analysis(in, base / "an1");
  write_analysis(in, base / "an2");
  EXPECT_DOUBLE_EQ(s1.cosine_trend, 1.0);
  EXPECT_DOUBLE_EQ(s1.grad_trend, -1.0);
  for (const auto& e : std::filesystem::directory_iterator(base / "an1")) {
    std::ifstream a(e.path()), b(base / "an2" / e.path().filename());
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    EXPECT_EQ(sa.str(), sb.str()) << e.path().filename();
  }
  EXPECT_TRUE(std::filesystem::exists(base / "an1" / "index.json"));
  EXPECT_THROW(write_analysis(in, "/proc/hysp-cannot-write"), IoError);
}

}  // namespace
}  // namespace hysp::analytics
