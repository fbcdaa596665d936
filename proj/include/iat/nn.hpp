#pragma once

#include "iat/autodiff.hpp"
#include "iat/rng.hpp"
#include "iat/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace iat::nn {

// Batch convention: a batch of B sequences, each T frames by C channels, is
// one matrix of shape (C x B*T) with column b*T + t holding frame t of
// sequence b. Flattening to (C*T x B) is then a plain column-major reshape.
Mat pack_batch(const std::vector<FlatAction>& batch);
std::vector<FlatAction> unpack_batch(const Mat& packed, int batch);

// Named parameter leaves, iterated in creation order. Values are updated in
// place between steps; graphs are rebuilt per step.
class ParamStore {
 public:
  ad::Var create(const std::string& name, int rows, int cols, const Mat& init);
  ad::Var get(const std::string& name) const;
  bool has(const std::string& name) const { return params_.count(name) > 0; }
  void set_value(const std::string& name, const Mat& value);

  const std::vector<std::string>& names() const { return order_; }
  std::vector<ad::Var> all() const;
  std::size_t parameter_count() const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, ad::Var> params_;
};

// Adam with bias correction; state is per-parameter and survives across steps.
class Adam {
 public:
  Adam(std::vector<ad::Var> params, Real rate, Real beta1 = 0.9, Real beta2 = 0.999,
       Real eps = 1e-8);
  void step(const std::vector<ad::Var>& grads);
  Real rate() const { return rate_; }

 private:
  std::vector<ad::Var> params_;
  std::vector<Mat> m_, v_;
  Real rate_, beta1_, beta2_, eps_;
  long t_ = 0;
};

int conv_out_time(int t_in, int kernel, int stride, int pad);

// 1-D convolution over time on the (C x B*T) layout, zero padding.
struct Conv1d {
  ad::Var w;  // (out_ch x in_ch*kernel)
  ad::Var b;  // (out_ch x 1)
  int in_ch, out_ch, kernel, stride, pad;

  Conv1d(ParamStore& store, const std::string& name, int in_ch, int out_ch,
         int kernel, int stride, int pad, Rng& init);
  ad::Var forward(const ad::Var& x, int batch) const;
};

// Affine layer on (in x B) columns.
struct Dense {
  ad::Var w;  // (out x in)
  ad::Var b;  // (out x 1)

  Dense(ParamStore& store, const std::string& name, int in, int out, Rng& init);
  ad::Var forward(const ad::Var& x) const;
};

// nearest-neighbor x2 upsampling along time
ad::Var upsample2(const ad::Var& x, int batch);

// (C x B*T) -> (C*T x B) and back
ad::Var flatten_time(const ad::Var& x, int batch);
ad::Var unflatten_time(const ad::Var& x, int channels, int batch);

// Unit-normalize every (x, y, z) triple of rows per column; channel count
// must be a multiple of 3. Keeps generated poses on valid limb vectors.
ad::Var renorm_limbs(const ad::Var& x, Real eps = 1e-12);

Mat he_init(int rows, int cols, int fan_in, Rng& rng);

}  // namespace iat::nn
