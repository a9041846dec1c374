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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hysp/errors.hpp"
#include "hysp/geometry.hpp"

namespace hysp::analytics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::span<const double> row(const ad::Tensor& t, std::size_t i) {
  const std::size_t d = t.shape()[1];
  return {t.data().data() + i * d, d};
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  const double na = geometry::norm(a), nb = geometry::norm(b);
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - geometry::dot(a, b) / (na * nb);
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

constexpr int kWidth = 640, kHeight = 360, kMargin = 48;

std::string svg_open(const std::string& title) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << xml_escape(title) << "</text>\n";
  return os.str();
}

std::string svg_no_data(const std::string& title) {
  std::ostringstream os;
  os << svg_open(title) << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\" fill=\"gray\">no data</text>\n"
     << "</svg>\n";
  return os.str();
}

/// Vertical bars scaled to the largest finite value; NaN values draw no bar.
std::string bar_chart(const std::vector<double>& values, const std::vector<std::string>& labels,
                      const std::string& title, const std::string& y_label) {
  double top = 0.0;
  for (double v : values)
    if (std::isfinite(v)) top = std::max(top, v);
  if (top <= 0.0) top = 1.0;
  const double plot_w = kWidth - 2.0 * kMargin, plot_h = kHeight - 2.0 * kMargin;
  const double slot = plot_w / static_cast<double>(values.size());
  std::ostringstream os;
  os << svg_open(title);
  os << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin << "\" y2=\""
     << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  os << "<text x=\"12\" y=\"" << kHeight / 2 << "\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 12 "
     << kHeight / 2 << ")\" text-anchor=\"middle\">" << xml_escape(y_label) << "</text>\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = kMargin + slot * static_cast<double>(i) + 0.1 * slot;
    const bool empty = !std::isfinite(values[i]);
    const double h = empty ? 0.0 : plot_h * std::max(values[i], 0.0) / top;
    os << "<rect class=\"bar\" data-index=\"" << i << "\" data-value=\"" << format_number(values[i]) << "\" x=\""
       << format_number(x) << "\" y=\"" << format_number(kHeight - kMargin - h) << "\" width=\""
       << format_number(0.8 * slot) << "\" height=\"" << format_number(h) << "\" fill=\""
       << (empty ? "none" : "steelblue") << "\"/>\n";
    os << "<text x=\"" << format_number(x + 0.4 * slot) << "\" y=\"" << kHeight - kMargin + 14
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">" << xml_escape(labels[i])
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::string to_string(Branch b) { return b == Branch::kTarget ? "target" : "online"; }
std::string to_string(Quantity q) { return q == Quantity::kCosineDistance ? "cosine_distance" : "grad_norm"; }

std::vector<UncertaintyRecord> collect_records(const model::TwinModel& twin, const data::Dataset& ds,
                                               double curvature, const RecordOptions& opts) {
  if (ds.empty()) throw InvalidInput("collect_records: empty dataset");
  if (opts.n_views < 1) throw InvalidInput("collect_records: n_views must be >= 1");
  opts.augmentation.validate();
  const geometry::Curvature c(curvature);
  std::vector<UncertaintyRecord> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out[i].sample_id = ds[i].sample_id;
    out[i].class_id = ds[i].class_id;
  }
  const std::size_t chunk = 64;
  const double inv_views = 1.0 / opts.n_views;
  for (int v = 0; v < opts.n_views; ++v) {
    for (std::size_t b = 0; b < ds.size(); b += chunk) {
      const std::size_t e = std::min(ds.size(), b + chunk);
      data::Dataset online, target;
      for (std::size_t i = b; i < e; ++i) {
        auto pair = data::make_view_pair(ds[i], opts.augmentation, twin.graph, opts.seed, static_cast<std::uint32_t>(v));
        online.push_back(std::move(pair.online));
        target.push_back(std::move(pair.target));
      }
      ad::Tape tape;
      const auto p = model::bind(tape, twin.online, false);
      const auto o = model::twin_forward(tape, p, model::to_batch(online), model::to_batch(target), twin, c);
      const ad::Tensor& h = o.h.value();
      const ad::Tensor& g = o.h_hat.value();
      for (std::size_t i = b; i < e; ++i) {
        const auto hi = row(h, i - b), gi = row(g, i - b);
        const geometry::PoincarePoint ph({hi.begin(), hi.end()}, c), pg({gi.begin(), gi.end()}, c);
        const double r = c.sqrt_c() * geometry::norm(opts.branch == Branch::kTarget ? gi : hi);
        out[i].radius += r * inv_views;
        out[i].cosine_distance += cosine_distance(hi, gi) * inv_views;
        out[i].grad_norm += geometry::norm(geometry::riemannian_grad_poincare(ph, pg).vec) * inv_views;
      }
    }
  }
  for (auto& r : out) r.uncertainty = 1.0 - r.radius;
  return out;
}

std::size_t HistogramReport::total() const { return std::accumulate(count.begin(), count.end(), std::size_t{0}); }

HistogramReport uncertainty_histogram(const std::vector<UncertaintyRecord>& records, Quantity quantity,
                                      std::size_t n_bins) {
  if (n_bins < 2) throw InvalidInput("histogram: n_bins must be >= 2");
  if (records.empty()) throw InvalidInput("histogram: no records");
  double lo = records[0].uncertainty, hi = lo;
  for (const auto& r : records) {
    lo = std::min(lo, r.uncertainty);
    hi = std::max(hi, r.uncertainty);
  }
  HistogramReport h;
  h.quantity = quantity;
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t i = 0; i <= n_bins; ++i) h.edges.push_back(i == n_bins ? hi : lo + width * static_cast<double>(i));
  std::vector<double> sum(n_bins, 0.0);
  h.count.assign(n_bins, 0);
  for (const auto& r : records) {
    std::size_t bin = 0;
    if (width > 0.0) bin = std::min(n_bins - 1, static_cast<std::size_t>((r.uncertainty - lo) / width));
    sum[bin] += quantity == Quantity::kCosineDistance ? r.cosine_distance : r.grad_norm;
    ++h.count[bin];
  }
  for (std::size_t i = 0; i < n_bins; ++i)
    h.mean.push_back(h.count[i] ? sum[i] / static_cast<double>(h.count[i]) : kNaN);
  return h;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidInput("spearman: length mismatch");
  if (x.size() < 2) return kNaN;
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

double histogram_trend(const HistogramReport& h) {
  std::vector<double> idx, val;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (h.empty_bin(i)) continue;
    idx.push_back(static_cast<double>(i));
    val.push_back(h.mean[i]);
  }
  return spearman(idx, val);
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidInput("median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<ClassRadius> class_radius_ranking(const std::vector<UncertaintyRecord>& records) {
  std::map<int, std::vector<double>> by_class;
  for (const auto& r : records) by_class[r.class_id].push_back(r.radius);
  std::vector<ClassRadius> out;
  for (auto& [k, radii] : by_class) out.push_back({k, median(radii), radii.size()});
  std::stable_sort(out.begin(), out.end(),
                   [](const ClassRadius& a, const ClassRadius& b) { return a.median_radius > b.median_radius; });
  return out;
}

ConfusionMatrix sorted_confusion_matrix(const std::vector<int>& labels, const std::vector<int>& predicted,
                                        const std::vector<ClassRadius>& ranking) {
  if (labels.size() != predicted.size()) throw InvalidInput("confusion: labels and predictions differ in length");
  ConfusionMatrix m;
  std::map<int, std::size_t> pos;
  for (const auto& c : ranking) {
    pos[c.class_id] = m.class_order.size();
    m.class_order.push_back(c.class_id);
  }
  const std::size_t k = m.class_order.size();
  m.counts.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto a = pos.find(labels[i]), b = pos.find(predicted[i]);
    if (a == pos.end() || b == pos.end())
      throw InvalidInput("confusion: class " + std::to_string(a == pos.end() ? labels[i] : predicted[i]) +
                         " has no radius record");
    ++m.counts[a->second][b->second];
  }
  return m;
}

// ---- emission -------------------------------------------------------------

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string records_csv(const std::vector<UncertaintyRecord>& records) {
  std::string s = "sample_id,class_id,radius,uncertainty,cosine_distance,grad_norm\n";
  for (const auto& r : records)
    s += std::to_string(r.sample_id) + ',' + std::to_string(r.class_id) + ',' + format_number(r.radius) + ',' +
         format_number(r.uncertainty) + ',' + format_number(r.cosine_distance) + ',' + format_number(r.grad_norm) +
         '\n';
  return s;
}

std::string histogram_csv(const HistogramReport& h) {
  std::string s = "bin,lo,hi,count,mean_" + to_string(h.quantity) + ",empty\n";
  for (std::size_t i = 0; i < h.bins(); ++i)
    s += std::to_string(i) + ',' + format_number(h.edges[i]) + ',' + format_number(h.edges[i + 1]) + ',' +
         std::to_string(h.count[i]) + ',' + format_number(h.mean[i]) + ',' + (h.empty_bin(i) ? "1" : "0") + '\n';
  return s;
}

std::string ranking_csv(const std::vector<ClassRadius>& ranking) {
  std::string s = "rank,class_id,median_radius,count\n";
  for (std::size_t i = 0; i < ranking.size(); ++i)
    s += std::to_string(i) + ',' + std::to_string(ranking[i].class_id) + ',' +
         format_number(ranking[i].median_radius) + ',' + std::to_string(ranking[i].count) + '\n';
  return s;
}

std::string confusion_csv(const ConfusionMatrix& m) {
  std::string s = "true\\predicted";
  for (int c : m.class_order) s += ',' + std::to_string(c);
  s += '\n';
  for (std::size_t i = 0; i < m.class_order.size(); ++i) {
    s += std::to_string(m.class_order[i]);
    for (std::size_t n : m.counts[i]) s += ',' + std::to_string(n);
    s += '\n';
  }
  return s;
}

std::string histogram_svg(const HistogramReport& h, const std::string& title) {
  if (h.total() == 0) return svg_no_data(title);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", 0.5 * (h.edges[i] + h.edges[i + 1]));
    labels.emplace_back(buf);
  }
  return bar_chart(h.mean, labels, title, "mean " + to_string(h.quantity));
}

std::string ranking_svg(const std::vector<ClassRadius>& ranking, const std::string& title) {
  if (ranking.empty()) return svg_no_data(title);
  std::vector<double> values;
  std::vector<std::string> labels;
  for (const auto& r : ranking) {
    values.push_back(r.median_radius);
    labels.push_back("class " + std::to_string(r.class_id));
  }
  return bar_chart(values, labels, title, "median radius");
}

std::string confusion_svg(const ConfusionMatrix& m, const std::string& title) {
  const std::size_t k = m.class_order.size();
  if (k == 0) return svg_no_data(title);
  std::size_t top = 1;
  for (const auto& r : m.counts)
    for (std::size_t n : r) top = std::max(top, n);
  const double cell = (kHeight - 2.0 * kMargin) / static_cast<double>(k);
  const double x0 = (kWidth - cell * static_cast<double>(k)) / 2.0, y0 = kMargin;
  std::ostringstream os;
  os << svg_open(title);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double shade = static_cast<double>(m.counts[i][j]) / static_cast<double>(top);
      const int level = static_cast<int>(std::lround(255.0 * (1.0 - shade)));
      os << "<rect class=\"cell\" data-row=\"" << i << "\" data-col=\"" << j << "\" data-value=\"" << m.counts[i][j]
         << "\" x=\"" << format_number(x0 + cell * static_cast<double>(j)) << "\" y=\""
         << format_number(y0 + cell * static_cast<double>(i)) << "\" width=\"" << format_number(cell)
         << "\" height=\"" << format_number(cell) << "\" fill=\"rgb(" << level << ',' << level << ",255)\" stroke=\"gray\"/>\n";
    }
    os << "<text x=\"" << format_number(x0 - 4) << "\" y=\"" << format_number(y0 + cell * (static_cast<double>(i) + 0.5))
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << m.class_order[i] << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw IoError("failed writing " + path.string());
}

AnalysisSummary write_analysis(const AnalysisInputs& in, const std::filesystem::path& dir) {
  AnalysisSummary s;
  s.cosine = uncertainty_histogram(in.records, Quantity::kCosineDistance, in.n_bins);
  s.grad = uncertainty_histogram(in.records, Quantity::kGradNorm, in.n_bins);
  s.ranking = class_radius_ranking(in.records);
  s.confusion = sorted_confusion_matrix(in.test_labels, in.test_predicted, s.ranking);
  s.cosine_trend = histogram_trend(s.cosine);
  s.grad_trend = histogram_trend(s.grad);

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const std::string suffix = " (" + std::to_string(in.n_bins) + " bins, " + std::to_string(in.n_views) + " views, " +
                             to_string(in.branch) + " radius)";
  const std::vector<std::pair<std::string, std::string>> files{
      {"records.csv", records_csv(in.records)},
      {"hist_cosine_distance.csv", histogram_csv(s.cosine)},
      {"hist_cosine_distance.svg", histogram_svg(s.cosine, "positive-pair cosine distance vs uncertainty" + suffix)},
      {"hist_grad_norm.csv", histogram_csv(s.grad)},
      {"hist_grad_norm.svg", histogram_svg(s.grad, "Riemannian gradient norm vs uncertainty" + suffix)},
      {"class_radius.csv", ranking_csv(s.ranking)},
      {"class_radius.svg", ranking_svg(s.ranking, "median radius per class" + suffix)},
      {"confusion.csv", confusion_csv(s.confusion)},
      {"confusion.svg", confusion_svg(s.confusion, "confusion matrix by descending median radius")},
  };
  nlohmann::json index{{"n_bins", in.n_bins},
                       {"n_views", in.n_views},
                       {"branch", to_string(in.branch)},
                       {"records", in.records.size()},
                       {"cosine_distance_trend", format_number(s.cosine_trend)},
                       {"grad_norm_trend", format_number(s.grad_trend)},
                       {"artifacts", nlohmann::json::array()}};
  for (const auto& [name, text] : files) {
    write_text(dir / name, text);
    index["artifacts"].push_back(name);
  }
  write_text(dir / "index.json", index.dump(2) + "\n");
  return s;
}

}  // namespace hysp::analytics
