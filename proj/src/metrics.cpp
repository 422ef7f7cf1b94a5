#include "wmr/metrics.hpp"

#include "wmr/error.hpp"

#include <cstdio>

namespace wmr {

BitMetrics metrics_from_counts(const BitCounts& c) {
  BitMetrics m;
  m.counts = c;
  if (c.tp + c.fn > 0) m.recall = double(c.tp) / double(c.tp + c.fn);
  if (c.tp + c.fp > 0) m.precision = double(c.tp) / double(c.tp + c.fp);
  return m;
}

BitMetrics bit_metrics(const BitMatrix& pred, const BitMatrix& truth) {
  if (pred.size() != truth.size())
    throw Error(ErrorKind::invalid_argument, "bit_metrics: " + std::to_string(pred.size()) + " vs " +
                                                 std::to_string(truth.size()));
  BitCounts c;
  for (int i = 0; i < truth.size(); ++i)
    for (int j = 0; j < truth.size(); ++j) {
      const bool t = truth(i, j), p = pred(i, j);
      if (t && p) ++c.tp;
      else if (t) ++c.fn;
      else if (p) ++c.fp;
      else ++c.tn;
    }
  return metrics_from_counts(c);
}

void MetricsReport::add(std::string name, const BitMatrix& pred, const BitMatrix& truth, std::string status) {
  ImageResult r;
  r.name = std::move(name);
  r.status = std::move(status);
  r.metrics = bit_metrics(pred, truth);
  r.exact = pred == truth;
  pooled += r.metrics.counts;
  images.push_back(std::move(r));
}

double MetricsReport::bit_accuracy() const {
  const long total = pooled.total();
  return total ? double(pooled.tp + pooled.tn) / double(total) : 0.0;
}

double MetricsReport::exact_match_rate() const {
  if (images.empty()) return 0.0;
  int exact = 0;
  for (const auto& r : images) exact += r.exact;
  return double(exact) / double(images.size());
}

int MetricsReport::failures() const {
  int n = 0;
  for (const auto& r : images) n += r.status != "ok";
  return n;
}

std::string format_metric(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

std::string MetricsReport::to_text() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %6s %6s %6s %10s %10s %5s %s\n", "image", "TP", "FN", "FP", "recall",
                "precision", "exact", "status");
  out += line;
  for (const auto& r : images) {
    std::snprintf(line, sizeof line, "%-24s %6ld %6ld %6ld %10s %10s %5s %s\n", r.name.c_str(), r.metrics.counts.tp,
                  r.metrics.counts.fn, r.metrics.counts.fp, format_metric(r.metrics.recall).c_str(),
                  format_metric(r.metrics.precision).c_str(), r.exact ? "yes" : "no", r.status.c_str());
    out += line;
  }
  const BitMetrics agg = aggregate();
  std::snprintf(line, sizeof line, "%-24s %6ld %6ld %6ld %10s %10s\n", "pooled", pooled.tp, pooled.fn, pooled.fp,
                format_metric(agg.recall).c_str(), format_metric(agg.precision).c_str());
  out += line;
  std::snprintf(line, sizeof line, "images %zu  failures %d  bit_accuracy %.4f  exact_match %.4f\n", images.size(),
                failures(), bit_accuracy(), exact_match_rate());
  out += line;
  return out;
}

}  // namespace wmr
