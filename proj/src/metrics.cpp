#include "xling/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "xling/error.hpp"

namespace xling {

WeightedPrf weighted_prf(const Confusion& confusion) {
  const std::size_t c = confusion.size();
  if (c == 0) throw FormatError("confusion matrix is empty");
  for (const auto& row : confusion) {
    if (row.size() != c) throw FormatError("confusion matrix is not square");
  }
  std::vector<std::size_t> predicted(c, 0);
  std::size_t total = 0;
  for (std::size_t t = 0; t < c; ++t) {
    for (std::size_t p = 0; p < c; ++p) {
      predicted[p] += confusion[t][p];
      total += confusion[t][p];
    }
  }
  if (total == 0) throw FormatError("confusion matrix has no counts");

  WeightedPrf out;
  out.per_class.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    const auto tp = static_cast<double>(confusion[k][k]);
    const std::size_t support = std::accumulate(confusion[k].begin(), confusion[k].end(), std::size_t{0});
    ClassMetrics& m = out.per_class[k];
    m.support = support;
    m.precision = predicted[k] == 0 ? 0.0 : tp / static_cast<double>(predicted[k]);
    m.recall = support == 0 ? 0.0 : tp / static_cast<double>(support);
    m.f1 = m.precision + m.recall == 0.0 ? 0.0
                                          : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    const double w = static_cast<double>(support) / static_cast<double>(total);
    out.precision += w * m.precision;
    out.recall += w * m.recall;
    out.f1 += w * m.f1;
  }
  return out;
}

AveragePrecision mean_average_precision(std::span<const std::vector<double>> class_scores,
                                        std::span<const std::size_t> labels) {
  const std::size_t n = labels.size();
  if (n == 0) throw FormatError("mean average precision needs at least one sample");
  if (class_scores.size() != n) throw FormatError("score and label counts differ");
  const std::size_t c = class_scores[0].size();
  for (const auto& s : class_scores) {
    if (s.size() != c) throw FormatError("ragged class score vectors");
  }

  AveragePrecision out;
  out.per_class.assign(c, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> order(n);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < c; ++k) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return class_scores[a][k] > class_scores[b][k];
    });
    std::size_t hits = 0;
    double precision_sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (labels[order[r]] == k) {
        ++hits;
        precision_sum += static_cast<double>(hits) / static_cast<double>(r + 1);
      }
    }
    if (hits == 0) {
      out.skipped_classes.push_back(k);
      continue;
    }
    out.per_class[k] = precision_sum / static_cast<double>(hits);
    sum += out.per_class[k];
    ++used;
  }
  out.mean = used == 0 ? 0.0 : sum / static_cast<double>(used);
  return out;
}

Confusion confusion_matrix(std::span<const std::size_t> labels,
                           std::span<const std::size_t> predictions, std::size_t classes) {
  if (labels.size() != predictions.size()) throw FormatError("label and prediction counts differ");
  Confusion m(classes, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes || predictions[i] >= classes) {
      throw FormatError("class index out of range at sample " + std::to_string(i));
    }
    ++m[labels[i]][predictions[i]];
  }
  return m;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

MetricsReport compute_metrics(std::span<const std::vector<double>> class_scores,
                              std::span<const std::size_t> labels, std::size_t classes) {
  if (labels.empty()) throw FormatError("cannot compute metrics on an empty set");
  std::vector<std::size_t> predictions;
  predictions.reserve(labels.size());
  for (const auto& s : class_scores) predictions.push_back(argmax(s));

  MetricsReport r;
  r.confusion = confusion_matrix(labels, predictions, classes);
  const WeightedPrf prf = weighted_prf(r.confusion);
  r.weighted_precision = prf.precision;
  r.weighted_recall = prf.recall;
  r.weighted_f1 = prf.f1;
  r.per_class = prf.per_class;
  std::size_t correct = 0;
  for (std::size_t k = 0; k < classes; ++k) correct += r.confusion[k][k];
  r.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  const AveragePrecision ap = mean_average_precision(class_scores, labels);
  r.map = ap.mean;
  r.map_skipped_classes = ap.skipped_classes;
  return r;
}

}  // namespace xling
