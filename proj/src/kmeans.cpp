#include "wmr/kmeans.hpp"

#include "wmr/error.hpp"
#include "wmr/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wmr {

namespace {

int nearest(const std::vector<double>& centers, double v) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(centers.size()); ++c) {
    const double d = std::abs(v - centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<double> plus_plus_seeds(std::span<const double> values, int k, Rng& rng) {
  const int n = static_cast<int>(values.size());
  std::vector<double> centers{values[rng.below(n)]};
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (values[i] - c) * (values[i] - c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      // Every point already coincides with a center.
      centers.push_back(values[rng.below(n)]);
      continue;
    }
    double r = rng.uniform() * total;
    int pick = n - 1;
    for (int i = 0; i < n; ++i) {
      r -= d2[i];
      if (r < 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(values[pick]);
  }
  return centers;
}

KMeans1D lloyd(std::span<const double> values, std::vector<double> centers) {
  const int n = static_cast<int>(values.size()), k = static_cast<int>(centers.size());
  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const int c = nearest(centers, values[i]);
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<double> sum(k, 0.0);
    std::vector<int> cnt(k, 0);
    for (int i = 0; i < n; ++i) {
      sum[assign[i]] += values[i];
      ++cnt[assign[i]];
    }
    for (int c = 0; c < k; ++c)
      if (cnt[c] > 0) centers[c] = sum[c] / cnt[c];
  }

  // Sort centers ascending and remap.
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return centers[a] < centers[b]; });
  std::vector<int> rank(k);
  for (int r = 0; r < k; ++r) rank[order[r]] = r;

  KMeans1D out;
  out.centers.resize(k);
  for (int r = 0; r < k; ++r) out.centers[r] = centers[order[r]];
  out.assignment.resize(n);
  std::vector<int> cnt(k, 0);
  for (int i = 0; i < n; ++i) {
    out.assignment[i] = rank[assign[i]];
    ++cnt[out.assignment[i]];
    const double d = values[i] - out.centers[out.assignment[i]];
    out.inertia += d * d;
  }
  out.degenerate = std::any_of(cnt.begin(), cnt.end(), [](int c) { return c == 0; });
  return out;
}

}  // namespace

KMeans1D kmeans_1d(std::span<const double> values, int k, std::uint64_t seed, int restarts) {
  if (k < 1) throw Error(ErrorKind::invalid_argument, "k must be positive");
  if (static_cast<int>(values.size()) < k)
    throw Error(ErrorKind::insufficient_points, "fewer values than clusters");
  Rng rng(derive_seed(seed, 0x4b3d));
  KMeans1D best;
  bool have = false;
  for (int r = 0; r < std::max(1, restarts); ++r) {
    KMeans1D run = lloyd(values, plus_plus_seeds(values, k, rng));
    const bool better = !have || (best.degenerate && !run.degenerate) ||
                        (run.degenerate == best.degenerate && run.inertia < best.inertia);
    if (better) {
      best = std::move(run);
      have = true;
    }
  }
  return best;
}

}  // namespace wmr
