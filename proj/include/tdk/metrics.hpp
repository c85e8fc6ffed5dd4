#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tdk/tensor.hpp"

namespace tdk {

/// Area under the ROC curve for labels in {0, 1}, computed from mid-ranks so
/// tied scores count one half. Throws unless both labels occur.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

double accuracy(std::span<const int> predicted, std::span<const int> labels);

enum class MetricKind { RocAuc, Accuracy };

std::string metric_name(MetricKind kind);

/// ROC-AUC for two classes, accuracy otherwise.
MetricKind default_metric(std::size_t class_count);

/// Scores from an N x C discriminant matrix: ROC-AUC uses column 1 minus
/// column 0, accuracy uses the row argmax.
double score_metric(const Matrix& scores, std::span<const int> labels, MetricKind kind);

/// One row of the metrics CSV.
struct MetricsRecord {
  std::string dataset;
  std::string subject;
  std::string session;
  std::size_t fold = 0;
  double theta = 0.0;
  std::size_t blocks = 0;
  std::string metric;
  double value = 0.0;
};

inline constexpr const char* kMetricsHeader = "dataset,subject,session,fold,theta,blocks,metric,value";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records);

}  // namespace tdk
