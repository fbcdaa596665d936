#pragma once

#include "iat/autodiff.hpp"
#include "iat/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

namespace iat::testing {

using Builder = std::function<ad::Var(const std::vector<ad::Var>&)>;

inline Real eval_at(const Builder& f, const std::vector<Mat>& vals) {
  std::vector<ad::Var> leaves;
  leaves.reserve(vals.size());
  for (const Mat& v : vals) leaves.emplace_back(v, false);
  ad::Var out = f(leaves);
  REQUIRE(out.rows() == 1);
  REQUIRE(out.cols() == 1);
  return ad::scalar_value(out);
}

// analytic gradients against central finite differences on every entry
inline void check_grads(const Builder& f, const std::vector<Mat>& vals,
                        Real h = 1e-5, Real tol = 1e-6) {
  std::vector<ad::Var> leaves;
  for (const Mat& v : vals) leaves.emplace_back(v, true);
  ad::Var out = f(leaves);
  std::vector<ad::Var> grads = ad::gradients(out, leaves);
  for (size_t i = 0; i < vals.size(); ++i) {
    for (int r = 0; r < vals[i].rows(); ++r)
      for (int c = 0; c < vals[i].cols(); ++c) {
        std::vector<Mat> plus = vals, minus = vals;
        plus[i](r, c) += h;
        minus[i](r, c) -= h;
        const Real fd = (eval_at(f, plus) - eval_at(f, minus)) / (2 * h);
        const Real an = grads[i].value()(r, c);
        const Real scale = std::max({Real(1), std::abs(fd), std::abs(an)});
        INFO("leaf ", i, " entry (", r, ",", c, ") fd=", fd, " analytic=", an);
        CHECK(std::abs(fd - an) <= tol * scale);
      }
  }
}

inline Mat randm(int r, int c, std::uint64_t seed) {
  Rng rng(seed);
  return rng.gaussian_mat(r, c);
}

}  // namespace iat::testing
