#pragma once

#include "iat/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace iat::pe {

// Linear projection onto the top principal directions of a point cloud.
struct PcaProjection {
  Mat p;     // d x m, orthonormal rows
  Vec mean;  // m, the centering offset
  int d = 0;
  bool rank_deficient = false;  // input rank < d; trailing rows arbitrary
};

// Principal directions of the columns of `means` (m x N, one sample per
// column). Sample covariance (divisor N-1). Rows are sign-canonicalized so
// refits are comparable. Needs at least d+1 samples and d <= m; inputs of
// rank < d are accepted with the flag set and a warning on stderr.
PcaProjection fit_pca(const Mat& means, int d);

Vec project(const PcaProjection& p, const Vec& mu);
Mat project_all(const PcaProjection& p, const Mat& mus);  // d x N

// variance of the data along the projection's directions, summed
Real captured_variance(const PcaProjection& p, const Mat& means);

inline Real pe_loss(const Vec& l_s, const Vec& l_r) { return (l_s - l_r).squaredNorm(); }

// Pairwise replacement confidences from embeddings l (d x N) and per-sample
// encoder spreads sigma (m x N): entry (i, j) =
// exp(-||l_i - l_j||^2 / (2 ||s * (P sigma_i)||^2)). Row i's bandwidth is its
// own projected sigma, so the matrix need not be symmetric; the diagonal is 1.
Mat compute_confidence(const Mat& embeddings, const Mat& sigmas,
                       const PcaProjection& p, Real s);

// Row-stochastic confidence matrix; row i is the replacement distribution
// for instance i.
struct NcMatrix {
  Mat values;
  Role role = Role::stimulative;

  int size() const { return static_cast<int>(values.rows()); }
};

NcMatrix row_normalize(const Mat& c, Role role);

// probability that an instance is replaced by a different one
Real effectiveness(const NcMatrix& nc);

// probability that replacement preserves the category label
Real reliability(const NcMatrix& nc, const std::vector<std::string>& labels);

// For each original pair and each of `multiplier` draws, resample the
// stimulation index from its NC row and the response index independently
// from the other role's NC row. Returns the originals plus the drawn pairs.
PairedSet sample_augmented_pairs(const PairedSet& a, const NcMatrix& nc_s,
                                 const NcMatrix& nc_r, int multiplier,
                                 std::uint64_t seed);

// upper bound on distinct pairs reachable by within-class replacement,
// under balanced classes: floor(n^2 / k)
long max_distinct_pairs(long n, long k);

}  // namespace iat::pe
