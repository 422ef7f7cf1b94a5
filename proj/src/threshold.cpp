#include "wmr/threshold.hpp"

#include "wmr/error.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace wmr {

namespace {

using u128 = unsigned __int128;

// Exact sign of p1/q1 - p2/q2 for positive denominators, by continued
// fraction expansion.
int compare_fractions(u128 p1, u128 q1, u128 p2, u128 q2) {
  int sign = 1;
  for (;;) {
    const u128 a = p1 / q1, b = p2 / q2;
    if (a != b) return a > b ? sign : -sign;
    p1 -= a * q1;
    p2 -= b * q2;
    if (p1 == 0 || p2 == 0) {
      if (p1 == p2) return 0;
      return p1 == 0 ? -sign : sign;
    }
    std::swap(p1, q1);
    std::swap(p2, q2);
    sign = -sign;
  }
}

}  // namespace

int otsu_bin(float v) {
  if (!(v > 0.0f)) return 0;
  return std::min(kOtsuBins - 1, static_cast<int>(v * kOtsuBins));
}

std::array<std::int64_t, kOtsuBins> histogram256(const ConfidenceMap& map) {
  std::array<std::int64_t, kOtsuBins> hist{};
  for (Eigen::Index k = 0; k < map.size(); ++k) ++hist[otsu_bin(map.data()[k])];
  return hist;
}

OtsuResult otsu_threshold(const ConfidenceMap& map) {
  if (map.size() == 0) throw Error(ErrorKind::invalid_argument, "otsu_threshold on an empty map");
  const auto hist = histogram256(map);
  const int occupied = static_cast<int>(std::count_if(hist.begin(), hist.end(), [](auto c) { return c > 0; }));
  if (occupied < 2) {
    OtsuResult r;
    r.degenerate = true;
    r.threshold = static_cast<double>(map.mean());
    r.bin = otsu_bin(static_cast<float>(r.threshold));
    return r;
  }

  // Sums use doubled bin centers (2b + 1) so every class statistic is an
  // exact integer and the between-class term is (n1*s0 - n0*s1)^2 / (n0*n1).
  std::int64_t total_n = 0, total_s = 0;
  for (int b = 0; b < kOtsuBins; ++b) {
    total_n += hist[b];
    total_s += hist[b] * (2 * b + 1);
  }
  std::int64_t n0 = 0, s0 = 0;
  u128 best_num = 0, best_den = 1;
  int best_bin = -1;
  for (int b = 0; b < kOtsuBins - 1; ++b) {
    n0 += hist[b];
    s0 += hist[b] * (2 * b + 1);
    const std::int64_t n1 = total_n - n0, s1 = total_s - s0;
    if (n0 == 0 || n1 == 0) continue;
    const __int128 diff = static_cast<__int128>(n1) * s0 - static_cast<__int128>(n0) * s1;
    const u128 mag = static_cast<u128>(diff < 0 ? -diff : diff);
    const u128 num = mag * mag, den = static_cast<u128>(n0) * static_cast<u128>(n1);
    if (best_bin < 0 || compare_fractions(num, den, best_num, best_den) > 0) {
      best_num = num;
      best_den = den;
      best_bin = b;
    }
  }
  OtsuResult r;
  r.bin = best_bin;
  r.threshold = (best_bin + 0.5) / kOtsuBins;
  return r;
}

ConfidenceMap binarize(const ConfidenceMap& map, double beta, double thre) {
  if (!(beta > 0.0 && beta <= 1.0)) throw Error(ErrorKind::invalid_argument, "beta outside (0, 1]");
  const float t = static_cast<float>(beta * thre);
  return (map > t).cast<float>();
}

}  // namespace wmr
