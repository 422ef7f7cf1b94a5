#pragma once

#include "wmr/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace wmr::test {

using u128 = unsigned __int128;

// Exhaustive between-class variance maximization over 256 bins, first
// maximum wins. Scores (n1*s0 - n0*s1)^2 / (n0*n1) with doubled bin centers
// are compared exactly by cross multiplication; maps stay small enough that
// the products fit in 128 bits.
inline int otsu_oracle(const ConfidenceMap& map) {
  if (map.size() > 64 * 64) throw std::invalid_argument("otsu_oracle: map too large");
  std::array<long long, 256> hist{};
  for (Eigen::Index k = 0; k < map.size(); ++k) {
    const float v = map.data()[k];
    int b = v > 0 ? int(std::floor(double(v) * 256.0)) : 0;
    hist[std::clamp(b, 0, 255)]++;
  }
  int best = -1;
  u128 best_num = 0, best_den = 1;
  for (int t = 0; t < 255; ++t) {
    long long n0 = 0, s0 = 0, n1 = 0, s1 = 0;
    for (int b = 0; b < 256; ++b) {
      if (b <= t) {
        n0 += hist[b];
        s0 += hist[b] * (2 * b + 1);
      } else {
        n1 += hist[b];
        s1 += hist[b] * (2 * b + 1);
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const long long d = n1 * s0 - n0 * s1;
    const u128 num = u128(d < 0 ? -d : d) * u128(d < 0 ? -d : d), den = u128(n0) * u128(n1);
    if (best < 0 || num * best_den > best_num * den) {
      best = t;
      best_num = num;
      best_den = den;
    }
  }
  return best;
}

}  // namespace wmr::test
