#include "tdk/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "tdk/feature_pipeline.hpp"

namespace tdk {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: scores and labels differ in length");
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("roc_auc: labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) throw std::invalid_argument("roc_auc: need both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j+1 share their mean.
    const double mid_rank = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t t = i; t <= j; ++t) {
      if (labels[order[t]] == 1) positive_rank_sum += mid_rank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(positives);
  const double nn = static_cast<double>(negatives);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double accuracy(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (labels.empty()) throw std::invalid_argument("accuracy: no samples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

std::string metric_name(MetricKind kind) { return kind == MetricKind::RocAuc ? "roc_auc" : "accuracy"; }

MetricKind default_metric(std::size_t class_count) {
  return class_count == 2 ? MetricKind::RocAuc : MetricKind::Accuracy;
}

double score_metric(const Matrix& scores, std::span<const int> labels, MetricKind kind) {
  if (kind == MetricKind::RocAuc) {
    const Vector s = binary_scores(scores);
    return roc_auc(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), labels);
  }
  const std::vector<int> predicted = predict_labels(scores);
  return accuracy(predicted, labels);
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records) {
  out << kMetricsHeader << '\n';
  for (const MetricsRecord& r : records) {
    out << csv_field(r.dataset) << ',' << csv_field(r.subject) << ',' << csv_field(r.session) << ','
        << r.fold << ',' << format_double(r.theta) << ',' << r.blocks << ',' << csv_field(r.metric) << ','
        << format_double(r.value) << '\n';
  }
}

}  // namespace tdk
