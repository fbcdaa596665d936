#include "iat/pe.hpp"

#include "iat/rng.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace iat::pe {

PcaProjection fit_pca(const Mat& means, int d) {
  const int m = static_cast<int>(means.rows());
  const int n = static_cast<int>(means.cols());
  if (d < 1) throw std::invalid_argument("fit_pca: d must be >= 1");
  if (d > m) throw std::invalid_argument("fit_pca: d exceeds the sample dimension");
  if (n < d + 1)
    throw std::invalid_argument("fit_pca: need at least d+1 samples, got " +
                                std::to_string(n));

  PcaProjection out;
  out.d = d;
  out.mean = means.rowwise().mean();
  Mat centered = means.colwise() - out.mean;

  Eigen::BDCSVD<Mat> svd(centered, Eigen::ComputeThinU);
  const Vec& sv = svd.singularValues();
  const Real tol = 1e-12 * std::max(Real(1), sv(0));
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  if (rank < d) {
    out.rank_deficient = true;
    std::cerr << "fit_pca: input rank " << rank << " < d=" << d
              << "; trailing directions are arbitrary\n";
  }
  out.p = svd.matrixU().leftCols(d).transpose();

  // canonical signs: largest-magnitude entry of each row made positive
  for (int r = 0; r < d; ++r) {
    int arg = 0;
    out.p.row(r).cwiseAbs().maxCoeff(&arg);
    if (out.p(r, arg) < 0) out.p.row(r) = -out.p.row(r);
  }
  return out;
}

Vec project(const PcaProjection& p, const Vec& mu) {
  if (mu.size() != p.mean.size())
    throw std::invalid_argument("project: dimension mismatch");
  return p.p * (mu - p.mean);
}

Mat project_all(const PcaProjection& p, const Mat& mus) {
  if (mus.rows() != p.mean.size())
    throw std::invalid_argument("project_all: dimension mismatch");
  return p.p * (mus.colwise() - p.mean);
}

Real captured_variance(const PcaProjection& p, const Mat& means) {
  const Mat proj = project_all(p, means);
  const int n = static_cast<int>(proj.cols());
  if (n < 2) throw std::invalid_argument("captured_variance: need 2+ samples");
  const Mat centered = proj.colwise() - Vec(proj.rowwise().mean());
  return centered.squaredNorm() / static_cast<Real>(n - 1);
}

Mat compute_confidence(const Mat& embeddings, const Mat& sigmas,
                       const PcaProjection& p, Real s) {
  if (s <= 0) throw std::invalid_argument("compute_confidence: s must be positive");
  const int n = static_cast<int>(embeddings.cols());
  if (sigmas.cols() != n)
    throw std::invalid_argument("compute_confidence: embedding/sigma count mismatch");
  if (embeddings.rows() != p.d)
    throw std::invalid_argument("compute_confidence: embedding dimension != d");

  Mat c(n, n);
  for (int i = 0; i < n; ++i) {
    const Real bandwidth = (s * (p.p * sigmas.col(i))).squaredNorm();
    if (bandwidth <= 0)
      throw std::runtime_error("compute_confidence: degenerate bandwidth at sample " +
                               std::to_string(i));
    for (int j = 0; j < n; ++j) {
      const Real dist = (embeddings.col(i) - embeddings.col(j)).squaredNorm();
      c(i, j) = std::exp(-dist / (2 * bandwidth));
    }
    c(i, i) = 1.0;
  }
  return c;
}

NcMatrix row_normalize(const Mat& c, Role role) {
  NcMatrix nc;
  nc.role = role;
  nc.values = c;
  for (int i = 0; i < c.rows(); ++i) {
    const Real total = c.row(i).sum();
    if (total <= 0)
      throw std::invalid_argument("row_normalize: nonpositive row sum at row " +
                                  std::to_string(i));
    nc.values.row(i) /= total;
  }
  return nc;
}

Real effectiveness(const NcMatrix& nc) {
  return 1.0 - nc.values.diagonal().mean();
}

Real reliability(const NcMatrix& nc, const std::vector<std::string>& labels) {
  const int n = nc.size();
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("reliability: label count mismatch");
  Real total = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (labels[i] == labels[j]) total += nc.values(i, j);
  return total / static_cast<Real>(n);
}

PairedSet sample_augmented_pairs(const PairedSet& a, const NcMatrix& nc_s,
                                 const NcMatrix& nc_r, int multiplier,
                                 std::uint64_t seed) {
  const int n = a.size();
  if (n == 0) throw std::invalid_argument("sample_augmented_pairs: empty paired set");
  if (multiplier < 1)
    throw std::invalid_argument("sample_augmented_pairs: multiplier must be >= 1");
  if (nc_s.size() != n || nc_r.size() != n)
    throw std::invalid_argument("sample_augmented_pairs: NC size mismatch");

  PairedSet out;
  out.pairs.reserve(static_cast<size_t>(n) * (multiplier + 1));
  out.pairs = a.pairs;
  for (ActionPair& pair : out.pairs) pair.provenance = Provenance::original;

  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const Vec row_s = nc_s.values.row(i).transpose();
    const Vec row_r = nc_r.values.row(i).transpose();
    for (int m = 0; m < multiplier; ++m) {
      const int pick_s = rng.categorical(row_s);
      const int pick_r = rng.categorical(row_r);
      ActionPair pair;
      pair.stim = a.pairs[pick_s].stim;
      pair.resp = a.pairs[pick_r].resp;
      pair.stim_category = a.pairs[pick_s].stim_category;
      pair.resp_category = a.pairs[pick_r].resp_category;
      pair.provenance = Provenance::augmented;
      out.pairs.push_back(std::move(pair));
    }
  }
  return out;
}

long max_distinct_pairs(long n, long k) {
  if (k <= 0) throw std::invalid_argument("max_distinct_pairs: k must be positive");
  if (n < 0) throw std::invalid_argument("max_distinct_pairs: n must be nonnegative");
  return (n * n) / k;
}

}  // namespace iat::pe
