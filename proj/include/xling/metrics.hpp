#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace xling {

/// confusion[true][predicted] counts.
using Confusion = std::vector<std::vector<std::size_t>>;

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct WeightedPrf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<ClassMetrics> per_class;
};

/// Support-weighted averages of per-class precision, recall and F1.
/// Zero denominators give 0 for that class.
WeightedPrf weighted_prf(const Confusion& confusion);

struct AveragePrecision {
  double mean = 0.0;
  std::vector<double> per_class;              // NaN for skipped classes
  std::vector<std::size_t> skipped_classes;   // classes with no positives
};

/// Macro-averaged one-vs-rest average precision. Samples are ranked by the
/// class probability, descending, ties by sample index.
AveragePrecision mean_average_precision(std::span<const std::vector<double>> class_scores,
                                        std::span<const std::size_t> labels);

Confusion confusion_matrix(std::span<const std::size_t> labels,
                           std::span<const std::size_t> predictions, std::size_t classes);

struct MetricsReport {
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  double map = 0.0;
  std::vector<ClassMetrics> per_class;
  Confusion confusion;
  std::vector<std::size_t> map_skipped_classes;
};

/// Argmax predictions (first index on ties) scored against `labels`.
MetricsReport compute_metrics(std::span<const std::vector<double>> class_scores,
                              std::span<const std::size_t> labels, std::size_t classes);

std::size_t argmax(std::span<const double> values);

}  // namespace xling
