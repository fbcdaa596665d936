#include "iat/pe.hpp"

#include "iat/rng.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

using namespace iat;
using namespace iat::pe;

namespace {

Mat random_cloud(int dim, int n, std::uint64_t seed, const Vec& scales) {
  Rng rng(seed);
  Mat x = rng.gaussian_mat(dim, n);
  for (int r = 0; r < dim; ++r) x.row(r) *= scales(r);
  return x;
}

}  // namespace

TEST_CASE("points on a line give the line back") {
  Rng rng(1);
  Vec dir(3);
  dir << 2, -1, 2;
  dir.normalize();
  Mat pts(3, 50);
  for (int i = 0; i < 50; ++i) pts.col(i) = (rng.gaussian() * 3.0) * dir + Vec::Ones(3);
  PcaProjection p = fit_pca(pts, 1);
  CHECK(std::abs(std::abs(p.p.row(0).dot(dir)) - 1.0) < 1e-9);
  // captured variance equals total variance
  const Mat centered = pts.colwise() - Vec(pts.rowwise().mean());
  const Real total = centered.squaredNorm() / 49.0;
  CHECK(captured_variance(p, pts) == doctest::Approx(total).epsilon(1e-9));
}

TEST_CASE("rows are orthonormal") {
  Vec scales(6);
  scales << 5, 3, 2, 1, 0.5, 0.1;
  Mat pts = random_cloud(6, 300, 2, scales);
  for (int d = 1; d <= 4; ++d) {
    PcaProjection p = fit_pca(pts, d);
    Mat gram = p.p * p.p.transpose();
    CHECK((gram - Mat::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("svd route agrees with the eigendecomposition route") {
  Vec scales(8);
  scales << 6, 4, 3, 2, 1, 0.7, 0.4, 0.2;
  Mat pts = random_cloud(8, 400, 3, scales);
  const int d = 3;
  PcaProjection p = fit_pca(pts, d);

  // second route: eigenvectors of the sample covariance
  const Mat centered = pts.colwise() - Vec(pts.rowwise().mean());
  const Mat cov = centered * centered.transpose() / 399.0;
  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  // eigenvalues ascending; take the top d
  Real top_sum = 0;
  for (int i = 0; i < d; ++i) top_sum += eig.eigenvalues()(7 - i);
  CHECK(captured_variance(p, pts) == doctest::Approx(top_sum).epsilon(1e-6));

  // spanned subspaces agree: projecting oracle eigenvectors through P
  // preserves their length
  for (int i = 0; i < d; ++i) {
    const Vec v = eig.eigenvectors().col(7 - i);
    CHECK((p.p * v).norm() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("isotropic cloud captures d/m of the variance") {
  Vec scales = Vec::Ones(8);
  Mat pts = random_cloud(8, 10000, 4, scales);
  PcaProjection p = fit_pca(pts, 2);
  const Mat centered = pts.colwise() - Vec(pts.rowwise().mean());
  const Real total = centered.squaredNorm() / 9999.0;
  const Real captured = captured_variance(p, pts);
  CHECK(captured / total > 0.25 * 0.9);
  CHECK(captured / total < 0.25 * 1.35);  // top-2 of 8 directions, sampling slack
}

TEST_CASE("rank-deficient input flagged but orthonormal") {
  Rng rng(5);
  Mat pts(5, 40);
  Vec a = rng.gaussian_vec(5), b = rng.gaussian_vec(5);
  for (int i = 0; i < 40; ++i) pts.col(i) = rng.gaussian() * a + rng.gaussian() * b;
  PcaProjection p = fit_pca(pts, 4);
  CHECK(p.rank_deficient);
  Mat gram = p.p * p.p.transpose();
  CHECK((gram - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fit preconditions") {
  Mat pts = random_cloud(4, 3, 6, Vec::Ones(4));
  CHECK_THROWS_AS(fit_pca(pts, 3), std::invalid_argument);  // needs d+1 samples
  CHECK_THROWS_AS(fit_pca(pts, 5), std::invalid_argument);  // d > m
  CHECK_THROWS_AS(fit_pca(pts, 0), std::invalid_argument);
}

TEST_CASE("projection centers and rotates") {
  Vec scales(5);
  scales << 3, 2, 1, 0.5, 0.25;
  Mat pts = random_cloud(5, 100, 7, scales);
  PcaProjection p = fit_pca(pts, 2);
  CHECK(project(p, p.mean).norm() < 1e-12);
  const Vec mu = p.mean + p.p.row(0).transpose();
  const Vec l = project(p, mu);
  CHECK(l(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(l(1)) < 1e-9);
  // independent recomputation
  Rng rng(8);
  const Vec any = rng.gaussian_vec(5);
  CHECK((project(p, any) - p.p * (any - p.mean)).norm() < 1e-12);
}

TEST_CASE("pe loss is squared distance") {
  Vec a(2), b(2);
  a << 0, 0;
  b << 3, 4;
  CHECK(pe_loss(a, b) == 25.0);
  CHECK(pe_loss(b, a) == 25.0);
  CHECK(pe_loss(a, a) == 0.0);
  Rng rng(9);
  const Vec x = rng.gaussian_vec(6), y = rng.gaussian_vec(6);
  Real manual = 0;
  for (int i = 0; i < 6; ++i) manual += (x(i) - y(i)) * (x(i) - y(i));
  CHECK(pe_loss(x, y) == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("confidence matrix hand-computed entries") {
  PcaProjection p;
  p.d = 1;
  p.p = Mat::Zero(1, 2);
  p.p(0, 0) = 1;
  p.mean = Vec::Zero(2);
  Mat emb(1, 2);
  emb << 0, 2;  // ||l_0 - l_1|| = 2
  Mat sig(2, 2);
  sig << 2, 2, 7, 7;  // P sigma = 2 for both rows
  // s = 0.5: bandwidth ||0.5 * 2||^2 = 1 -> C(0,1) = exp(-4/2) = e^-2
  Mat c = compute_confidence(emb, sig, p, 0.5);
  CHECK(c(0, 0) == 1.0);
  CHECK(c(1, 1) == 1.0);
  CHECK(c(0, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(c(0, 1) == doctest::Approx(0.13534).epsilon(1e-4));
}

TEST_CASE("huge scale factor saturates confidences") {
  PcaProjection p;
  p.d = 2;
  p.p = Mat::Identity(2, 3);
  p.mean = Vec::Zero(3);
  Rng rng(10);
  Mat emb = rng.gaussian_mat(2, 6);
  Mat sig = rng.gaussian_mat(3, 6).cwiseAbs() + Mat::Constant(3, 6, 0.1);
  Mat c = compute_confidence(emb, sig, p, 1e6);
  CHECK(c.minCoeff() > 0.999999);
}

TEST_CASE("asymmetric bandwidths produce asymmetric confidences") {
  PcaProjection p;
  p.d = 1;
  p.p = Mat::Ones(1, 1);
  p.mean = Vec::Zero(1);
  Mat emb(1, 2);
  emb << 0, 1;
  Mat sig(1, 2);
  sig << 1.0, 3.0;  // row 0 narrow, row 1 wide
  Mat c = compute_confidence(emb, sig, p, 1.0);
  CHECK(c(0, 1) < c(1, 0));
}

TEST_CASE("degenerate bandwidth names the sample") {
  PcaProjection p;
  p.d = 1;
  p.p = Mat::Zero(1, 2);
  p.p(0, 0) = 1;
  p.mean = Vec::Zero(2);
  Mat emb = Mat::Zero(1, 2);
  Mat sig(2, 2);
  sig << 1, 0, 0, 5;  // sample 1's sigma is orthogonal to P's row
  CHECK_THROWS_WITH_AS(compute_confidence(emb, sig, p, 0.1), doctest::Contains("1"),
                       std::runtime_error);
}

TEST_CASE("row normalization") {
  Mat c(2, 2);
  c << 1, 1, 0, 2;
  NcMatrix nc = row_normalize(c, Role::stimulative);
  CHECK(nc.values(0, 0) == 0.5);
  CHECK(nc.values(0, 1) == 0.5);
  CHECK(nc.values(1, 1) == 1.0);
  NcMatrix id = row_normalize(Mat::Identity(4, 4), Role::responsive);
  CHECK(id.values == Mat::Identity(4, 4));
  Rng rng(11);
  Mat r = rng.gaussian_mat(7, 7).cwiseAbs();
  r.diagonal().setOnes();
  NcMatrix rn = row_normalize(r, Role::stimulative);
  for (int i = 0; i < 7; ++i)
    CHECK(std::abs(rn.values.row(i).sum() - 1.0) < 1e-12);
}

TEST_CASE("effectiveness identities") {
  NcMatrix id = row_normalize(Mat::Identity(5, 5), Role::stimulative);
  CHECK(effectiveness(id) == 0.0);
  NcMatrix uni = row_normalize(Mat::Ones(4, 4), Role::stimulative);
  CHECK(effectiveness(uni) == doctest::Approx(0.75).epsilon(1e-12));
  // random matrix: 1 - mean diag equals mean off-diagonal mass
  Rng rng(12);
  Mat c = rng.gaussian_mat(6, 6).cwiseAbs();
  c.diagonal().setOnes();
  NcMatrix nc = row_normalize(c, Role::stimulative);
  Real off = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) off += nc.values(i, j);
  CHECK(effectiveness(nc) == doctest::Approx(off / 6.0).epsilon(1e-12));
}

TEST_CASE("reliability identities") {
  NcMatrix uni = row_normalize(Mat::Ones(6, 6), Role::stimulative);
  std::vector<std::string> balanced = {"a", "a", "b", "b", "c", "c"};
  CHECK(reliability(uni, balanced) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  std::vector<std::string> same(6, "a");
  CHECK(reliability(uni, same) == doctest::Approx(1.0).epsilon(1e-12));
  NcMatrix id = row_normalize(Mat::Identity(6, 6), Role::stimulative);
  CHECK(reliability(id, balanced) == doctest::Approx(1.0).epsilon(1e-12));
}

namespace {

PairedSet tiny_set(int n) {
  PairedSet a;
  for (int i = 0; i < n; ++i) {
    ActionPair pair;
    pair.stim = Mat::Constant(2, 3, Real(i));
    pair.resp = Mat::Constant(2, 3, Real(100 + i));
    pair.stim_category = "s" + std::to_string(i % 2);
    pair.resp_category = "r" + std::to_string(i % 2);
    a.pairs.push_back(pair);
  }
  return a;
}

}  // namespace

TEST_CASE("identity NC reproduces originals") {
  PairedSet a = tiny_set(4);
  NcMatrix id = row_normalize(Mat::Identity(4, 4), Role::stimulative);
  PairedSet out = sample_augmented_pairs(a, id, id, 3, 7);
  CHECK(out.size() == 16);
  for (int i = 0; i < 4; ++i) CHECK(out.pairs[i].provenance == Provenance::original);
  for (int i = 4; i < 16; ++i) {
    const int src = (i - 4) / 3;
    CHECK(out.pairs[i].provenance == Provenance::augmented);
    CHECK(out.pairs[i].stim == a.pairs[src].stim);
    CHECK(out.pairs[i].resp == a.pairs[src].resp);
  }
}

TEST_CASE("augmentation is seed-deterministic") {
  PairedSet a = tiny_set(6);
  Rng rng(13);
  Mat c = rng.gaussian_mat(6, 6).cwiseAbs();
  c.diagonal().setOnes();
  NcMatrix nc = row_normalize(c, Role::stimulative);
  PairedSet x = sample_augmented_pairs(a, nc, nc, 2, 99);
  PairedSet y = sample_augmented_pairs(a, nc, nc, 2, 99);
  REQUIRE(x.size() == y.size());
  for (int i = 0; i < x.size(); ++i) {
    CHECK(x.pairs[i].stim == y.pairs[i].stim);
    CHECK(x.pairs[i].resp == y.pairs[i].resp);
  }
}

TEST_CASE("replacement statistics follow the NC rows") {
  // two tight groups: rows put 0.45 on each same-group index, 0.05 across
  const int n = 4;
  Mat c(n, n);
  c << 0.45, 0.45, 0.05, 0.05,
       0.45, 0.45, 0.05, 0.05,
       0.05, 0.05, 0.45, 0.45,
       0.05, 0.05, 0.45, 0.45;
  NcMatrix nc = row_normalize(c, Role::stimulative);
  PairedSet a = tiny_set(n);  // categories s0,s1 alternate; regroup to match rows
  a.pairs[0].stim_category = a.pairs[1].stim_category = "g0";
  a.pairs[2].stim_category = a.pairs[3].stim_category = "g1";
  const std::vector<std::string> labels = {"g0", "g0", "g1", "g1"};
  const Real r_expected = reliability(nc, labels);

  PairedSet out = sample_augmented_pairs(a, nc, nc, 500, 17);
  int stim_same = 0, total = 0;
  for (const auto& pair : out.pairs) {
    if (pair.provenance != Provenance::augmented) continue;
    ++total;
    // a draw keeps the category iff the replacement stim came from its group
    // (original index recoverable from the constant fill value)
    const int src = static_cast<int>(pair.stim(0, 0));
    const int row = (total - 1) / 500;
    if (labels[src] == labels[row]) ++stim_same;
  }
  CHECK(total == 2000);
  CHECK(std::abs(stim_same / Real(total) - r_expected) < 0.03);
}

TEST_CASE("pair count bound") {
  CHECK(max_distinct_pairs(80, 5) == 1280);
  CHECK(max_distinct_pairs(5, 5) == 5);
  CHECK(max_distinct_pairs(282, 5) == 15904);
  CHECK(max_distinct_pairs(7, 2) == 24);  // floor semantics
  CHECK_THROWS_AS(max_distinct_pairs(10, 0), std::invalid_argument);
}
