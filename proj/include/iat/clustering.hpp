#pragma once

#include "iat/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace iat::cluster {

struct KMeansResult {
  Mat centers;                  // dim x k
  std::vector<int> assignment;  // per point
  Real inertia = 0;             // sum of squared distances to assigned centers
};

// Lloyd's algorithm with k-means++ seeding; best inertia over `restarts`
// independent starts. Points are columns.
KMeansResult kmeans(const Mat& points, int k, std::uint64_t seed, int restarts = 8,
                    int max_iters = 100);

// fraction of points whose cluster's majority label matches their own
Real purity(const std::vector<int>& assignment, const std::vector<std::string>& labels,
            int k);

// mean silhouette over points; singleton clusters score 0
Real silhouette(const Mat& points, const std::vector<int>& assignment);

}  // namespace iat::cluster
