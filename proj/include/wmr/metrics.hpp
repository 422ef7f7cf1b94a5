#pragma once

#include "wmr/watermark.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wmr {

struct BitCounts {
  long tp = 0;
  long fn = 0;
  long fp = 0;
  long tn = 0;

  BitCounts& operator+=(const BitCounts& o) {
    tp += o.tp;
    fn += o.fn;
    fp += o.fp;
    tn += o.tn;
    return *this;
  }
  long total() const { return tp + fn + fp + tn; }
};

/// Undefined (zero denominator) values are empty.
struct BitMetrics {
  BitCounts counts;
  std::optional<double> recall;
  std::optional<double> precision;
};

BitMetrics metrics_from_counts(const BitCounts& c);

/// TP: truth 1, pred 1. FN: truth 1, pred 0. FP: truth 0, pred 1.
BitMetrics bit_metrics(const BitMatrix& pred, const BitMatrix& truth);

struct ImageResult {
  std::string name;
  std::string status = "ok";  // error kind when decoding failed
  BitMetrics metrics;
  bool exact = false;
};

/// Counts are pooled over images; a failed decode scores as an all-zero matrix.
struct MetricsReport {
  std::vector<ImageResult> images;
  BitCounts pooled;

  void add(std::string name, const BitMatrix& pred, const BitMatrix& truth, std::string status = "ok");
  BitMetrics aggregate() const { return metrics_from_counts(pooled); }
  double bit_accuracy() const;
  double exact_match_rate() const;
  int failures() const;

  /// Fixed-format text table: one line per image, then the pooled summary.
  std::string to_text() const;
};

std::string format_metric(const std::optional<double>& v);

}  // namespace wmr
