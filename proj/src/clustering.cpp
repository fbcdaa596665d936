#include "iat/clustering.hpp"

#include "iat/rng.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

namespace iat::cluster {
namespace {

Real sq_dist(const Mat& points, int i, const Mat& centers, int c) {
  return (points.col(i) - centers.col(c)).squaredNorm();
}

Mat kmeanspp_init(const Mat& points, int k, Rng& rng) {
  const int n = static_cast<int>(points.cols());
  Mat centers(points.rows(), k);
  centers.col(0) = points.col(rng.uniform_int(n));
  Vec dist = Vec::Constant(n, std::numeric_limits<Real>::max());
  for (int c = 1; c < k; ++c) {
    for (int i = 0; i < n; ++i)
      dist(i) = std::min(dist(i), sq_dist(points, i, centers, c - 1));
    if (dist.sum() <= 0) {
      centers.col(c) = points.col(rng.uniform_int(n));  // all points coincide
    } else {
      centers.col(c) = points.col(rng.categorical(dist));
    }
  }
  return centers;
}

KMeansResult lloyd(const Mat& points, Mat centers, int max_iters) {
  const int n = static_cast<int>(points.cols());
  const int k = static_cast<int>(centers.cols());
  KMeansResult result;
  result.assignment.assign(n, 0);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      Real best_d = sq_dist(points, i, centers, 0);
      for (int c = 1; c < k; ++c) {
        const Real d = sq_dist(points, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (result.assignment[i] != best) {
        result.assignment[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    Mat sums = Mat::Zero(points.rows(), k);
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums.col(result.assignment[i]) += points.col(i);
      ++counts[result.assignment[i]];
    }
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0) centers.col(c) = sums.col(c) / counts[c];
  }
  result.centers = std::move(centers);
  result.inertia = 0;
  for (int i = 0; i < n; ++i)
    result.inertia += sq_dist(points, i, result.centers, result.assignment[i]);
  return result;
}

}  // namespace

KMeansResult kmeans(const Mat& points, int k, std::uint64_t seed, int restarts,
                    int max_iters) {
  const int n = static_cast<int>(points.cols());
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (n < k) throw std::invalid_argument("kmeans: fewer points than clusters");
  if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");

  Rng rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<Real>::max();
  for (int r = 0; r < restarts; ++r) {
    Rng local = rng.fork(r + 1);
    KMeansResult candidate = lloyd(points, kmeanspp_init(points, k, local), max_iters);
    if (candidate.inertia < best.inertia) best = std::move(candidate);
  }
  return best;
}

Real purity(const std::vector<int>& assignment, const std::vector<std::string>& labels,
            int k) {
  if (assignment.size() != labels.size())
    throw std::invalid_argument("purity: assignment/label count mismatch");
  if (assignment.empty()) throw std::invalid_argument("purity: empty input");
  std::vector<std::map<std::string, int>> tallies(k);
  for (size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] < 0 || assignment[i] >= k)
      throw std::invalid_argument("purity: cluster index out of range");
    ++tallies[assignment[i]][labels[i]];
  }
  long agree = 0;
  for (const auto& tally : tallies) {
    int top = 0;
    for (const auto& [label, count] : tally) top = std::max(top, count);
    agree += top;
  }
  return static_cast<Real>(agree) / static_cast<Real>(assignment.size());
}

Real silhouette(const Mat& points, const std::vector<int>& assignment) {
  const int n = static_cast<int>(points.cols());
  if (static_cast<int>(assignment.size()) != n)
    throw std::invalid_argument("silhouette: assignment count mismatch");
  if (n < 2) throw std::invalid_argument("silhouette: need 2+ points");
  const int k = *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<int> counts(k, 0);
  for (int a : assignment) ++counts[a];

  Real total = 0;
  for (int i = 0; i < n; ++i) {
    Vec mean_dist = Vec::Zero(k);
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      mean_dist(assignment[j]) += (points.col(i) - points.col(j)).norm();
    }
    const int own = assignment[i];
    if (counts[own] < 2) continue;  // singleton scores 0
    Real a = mean_dist(own) / (counts[own] - 1);
    Real b = std::numeric_limits<Real>::max();
    for (int c = 0; c < k; ++c) {
      if (c == own || counts[c] == 0) continue;
      b = std::min(b, mean_dist(c) / counts[c]);
    }
    if (b == std::numeric_limits<Real>::max()) continue;  // single cluster
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<Real>(n);
}

}  // namespace iat::cluster
