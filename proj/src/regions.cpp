#include "wmr/regions.hpp"

#include <Eigen/Eigenvalues>

#include "wmr/error.hpp"
#include "wmr/kmeans.hpp"
#include "wmr/random.hpp"

#include <algorithm>
#include <cmath>

namespace wmr {

Plane<int> label_components(const ConfidenceMap& binary, int& count) {
  const int h = static_cast<int>(binary.rows()), w = static_cast<int>(binary.cols());
  Plane<int> labels = Plane<int>::Zero(h, w);
  std::vector<Eigen::Vector2i> stack;
  count = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (binary(y, x) == 0.0f || labels(y, x) != 0) continue;
      labels(y, x) = ++count;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Eigen::Vector2i p = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x() + dx, ny = p.y() + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (binary(ny, nx) == 0.0f || labels(ny, nx) != 0) continue;
            labels(ny, nx) = count;
            stack.push_back({nx, ny});
          }
      }
    }
  return labels;
}

std::vector<RegionProps> region_analysis(const ConfidenceMap& binary) {
  int count = 0;
  const Plane<int> labels = label_components(binary, count);
  return region_analysis(labels, count);
}

std::vector<RegionProps> region_analysis(const Plane<int>& labels, int count) {
  struct Moments {
    double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  };
  std::vector<Moments> m(count);
  for (Eigen::Index y = 0; y < labels.rows(); ++y)
    for (Eigen::Index x = 0; x < labels.cols(); ++x) {
      const int l = labels(y, x);
      if (l == 0) continue;
      Moments& r = m[l - 1];
      const double fx = double(x), fy = double(y);
      r.n += 1;
      r.sx += fx;
      r.sy += fy;
      r.sxx += fx * fx;
      r.syy += fy * fy;
      r.sxy += fx * fy;
    }

  std::vector<RegionProps> out;
  out.reserve(count);
  for (int l = 0; l < count; ++l) {
    const Moments& r = m[l];
    RegionProps p;
    p.label = l + 1;
    p.area = static_cast<int>(r.n);
    p.centroid = {r.sx / r.n, r.sy / r.n};
    Eigen::Matrix2d cov;
    cov(0, 0) = r.sxx / r.n - p.centroid.x() * p.centroid.x();
    cov(1, 1) = r.syy / r.n - p.centroid.y() * p.centroid.y();
    cov(0, 1) = cov(1, 0) = r.sxy / r.n - p.centroid.x() * p.centroid.y();
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    const Eigen::Vector2d ev = eig.eigenvalues().cwiseMax(0.0);
    p.semi_major = 2.0 * std::sqrt(ev(1));
    p.semi_minor = 2.0 * std::sqrt(ev(0));
    p.major_axis = eig.eigenvectors().col(1);
    out.push_back(p);
  }
  return out;
}

std::vector<RegionProps> accepted_regions(const std::vector<RegionProps>& props, double min_axis_sum) {
  std::vector<RegionProps> out;
  for (const RegionProps& p : props)
    if (p.semi_major + p.semi_minor > min_axis_sum) out.push_back(p);
  return out;
}

std::vector<Eigen::Vector2d> filter_regions(const std::vector<RegionProps>& props, double min_axis_sum) {
  std::vector<Eigen::Vector2d> out;
  for (const RegionProps& p : accepted_regions(props, min_axis_sum)) out.push_back(p.centroid);
  return out;
}

std::vector<Eigen::Vector2d> split_chains(const Plane<int>& labels, const std::vector<RegionProps>& regions,
                                          double pitch, double single_extent, std::uint64_t seed) {
  if (!(pitch > 0)) throw Error(ErrorKind::invalid_argument, "split_chains: pitch must be positive");
  std::vector<int> slot(labels.maxCoeff() + 1, -1);
  for (std::size_t r = 0; r < regions.size(); ++r) slot[regions[r].label] = static_cast<int>(r);

  std::vector<std::vector<Eigen::Vector2d>> pixels(regions.size());
  for (Eigen::Index y = 0; y < labels.rows(); ++y)
    for (Eigen::Index x = 0; x < labels.cols(); ++x)
      if (const int l = labels(y, x); l > 0 && slot[l] >= 0) pixels[slot[l]].push_back({double(x), double(y)});

  std::vector<Eigen::Vector2d> out;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const RegionProps& p = regions[r];
    std::vector<double> t;
    t.reserve(pixels[r].size());
    for (const auto& q : pixels[r]) t.push_back((q - p.centroid).dot(p.major_axis));
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    const double extent = t.empty() ? 0.0 : *hi - *lo + 1.0;
    const int k = 1 + std::max(0, static_cast<int>(std::lround((extent - single_extent) / pitch)));
    if (k == 1 || static_cast<int>(t.size()) < k) {
      out.push_back(p.centroid);
      continue;
    }
    const KMeans1D km = kmeans_1d(t, k, derive_seed(seed, static_cast<std::uint64_t>(p.label)));
    std::vector<Eigen::Vector2d> sum(k, Eigen::Vector2d::Zero());
    std::vector<int> n(k, 0);
    for (std::size_t i = 0; i < t.size(); ++i) {
      sum[km.assignment[i]] += pixels[r][i];
      ++n[km.assignment[i]];
    }
    for (int c = 0; c < k; ++c)
      if (n[c] > 0) out.push_back(sum[c] / n[c]);
  }
  return out;
}

}  // namespace wmr
