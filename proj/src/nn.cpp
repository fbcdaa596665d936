#include "iat/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace iat::nn {

using ad::Var;

Mat pack_batch(const std::vector<FlatAction>& batch) {
  if (batch.empty()) throw std::invalid_argument("pack_batch: empty batch");
  const int t = static_cast<int>(batch[0].rows());
  const int c = static_cast<int>(batch[0].cols());
  Mat out(c, static_cast<int>(batch.size()) * t);
  for (int b = 0; b < static_cast<int>(batch.size()); ++b) {
    if (batch[b].rows() != t || batch[b].cols() != c)
      throw std::invalid_argument("pack_batch: inconsistent shapes");
    out.middleCols(b * t, t) = batch[b].transpose();
  }
  return out;
}

std::vector<FlatAction> unpack_batch(const Mat& packed, int batch) {
  if (batch < 1 || packed.cols() % batch != 0)
    throw std::invalid_argument("unpack_batch: column count not divisible by batch");
  const int t = static_cast<int>(packed.cols()) / batch;
  std::vector<FlatAction> out(batch);
  for (int b = 0; b < batch; ++b) out[b] = packed.middleCols(b * t, t).transpose();
  return out;
}

ad::Var ParamStore::create(const std::string& name, int rows, int cols, const Mat& init) {
  if (params_.count(name))
    throw std::invalid_argument("param '" + name + "' already exists");
  if (init.rows() != rows || init.cols() != cols)
    throw std::invalid_argument("param '" + name + "': init shape mismatch");
  Var v(init, true);
  params_.emplace(name, v);
  order_.push_back(name);
  return v;
}

ad::Var ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::invalid_argument("unknown param '" + name + "'");
  return it->second;
}

void ParamStore::set_value(const std::string& name, const Mat& value) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::invalid_argument("unknown param '" + name + "'");
  if (value.rows() != it->second.rows() || value.cols() != it->second.cols())
    throw std::invalid_argument("param '" + name + "': value shape mismatch");
  it->second.node()->value = value;
}

std::vector<ad::Var> ParamStore::all() const {
  std::vector<Var> out;
  out.reserve(order_.size());
  for (const auto& name : order_) out.push_back(params_.at(name));
  return out;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& name : order_) n += params_.at(name).value().size();
  return n;
}

Adam::Adam(std::vector<ad::Var> params, Real rate, Real beta1, Real beta2, Real eps)
    : params_(std::move(params)), rate_(rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const Var& p : params_) {
    m_.push_back(Mat::Zero(p.rows(), p.cols()));
    v_.push_back(Mat::Zero(p.rows(), p.cols()));
  }
}

void Adam::step(const std::vector<ad::Var>& grads) {
  if (grads.size() != params_.size())
    throw std::invalid_argument("adam: gradient count mismatch");
  ++t_;
  const Real c1 = 1 - std::pow(beta1_, static_cast<Real>(t_));
  const Real c2 = 1 - std::pow(beta2_, static_cast<Real>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    const Mat& g = grads[i].value();
    m_[i] = beta1_ * m_[i] + (1 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1 - beta2_) * g.cwiseProduct(g);
    const Mat mhat = m_[i] / c1;
    const Mat vhat = v_[i] / c2;
    params_[i].node()->value -=
        rate_ * mhat.cwiseQuotient((vhat.array().sqrt() + eps_).matrix());
  }
}

int conv_out_time(int t_in, int kernel, int stride, int pad) {
  return (t_in + 2 * pad - kernel) / stride + 1;
}

Mat he_init(int rows, int cols, int fan_in, Rng& rng) {
  return std::sqrt(Real(2) / static_cast<Real>(fan_in)) * rng.gaussian_mat(rows, cols);
}

Conv1d::Conv1d(ParamStore& store, const std::string& name, int in_ch_, int out_ch_,
               int kernel_, int stride_, int pad_, Rng& init)
    : in_ch(in_ch_), out_ch(out_ch_), kernel(kernel_), stride(stride_), pad(pad_) {
  w = store.create(name + ".w", out_ch, in_ch * kernel,
                   he_init(out_ch, in_ch * kernel, in_ch * kernel, init));
  b = store.create(name + ".b", out_ch, 1, Mat::Zero(out_ch, 1));
}

ad::Var Conv1d::forward(const ad::Var& x, int batch) const {
  if (x.rows() != in_ch)
    throw std::invalid_argument("conv1d: expected " + std::to_string(in_ch) +
                                " channels, got " + std::to_string(x.rows()));
  if (batch < 1 || x.cols() % batch != 0)
    throw std::invalid_argument("conv1d: column count not divisible by batch");
  const int t_in = x.cols() / batch;
  const int t_out = conv_out_time(t_in, kernel, stride, pad);
  if (t_out < 1) throw std::invalid_argument("conv1d: sequence too short");

  // im2col: one gathered copy of x per kernel offset, stacked on channels
  Var cols;
  for (int k_off = 0; k_off < kernel; ++k_off) {
    std::vector<int> idx(batch * t_out);
    for (int b = 0; b < batch; ++b)
      for (int tau = 0; tau < t_out; ++tau) {
        const int t_src = tau * stride - pad + k_off;
        idx[b * t_out + tau] = (t_src >= 0 && t_src < t_in) ? b * t_in + t_src : -1;
      }
    Var g = ad::gather_cols(x, std::move(idx));
    cols = cols.defined() ? ad::vcat(cols, g) : g;
  }
  // weight layout matches the stacking: w(:, k_off*in_ch + c_in)
  return ad::add(ad::matmul(w, cols), ad::repcols(b, batch * t_out));
}

Dense::Dense(ParamStore& store, const std::string& name, int in, int out, Rng& init) {
  w = store.create(name + ".w", out, in, he_init(out, in, in, init));
  b = store.create(name + ".b", out, 1, Mat::Zero(out, 1));
}

ad::Var Dense::forward(const ad::Var& x) const {
  if (x.rows() != w.cols())
    throw std::invalid_argument("dense: expected " + std::to_string(w.cols()) +
                                " rows, got " + std::to_string(x.rows()));
  return ad::add(ad::matmul(w, x), ad::repcols(b, x.cols()));
}

ad::Var upsample2(const ad::Var& x, int batch) {
  if (batch < 1 || x.cols() % batch != 0)
    throw std::invalid_argument("upsample2: column count not divisible by batch");
  const int t_in = x.cols() / batch;
  std::vector<int> idx(batch * t_in * 2);
  for (int b = 0; b < batch; ++b)
    for (int tau = 0; tau < 2 * t_in; ++tau) idx[b * 2 * t_in + tau] = b * t_in + tau / 2;
  return ad::gather_cols(x, std::move(idx));
}

ad::Var flatten_time(const ad::Var& x, int batch) {
  if (batch < 1 || x.cols() % batch != 0)
    throw std::invalid_argument("flatten_time: column count not divisible by batch");
  const int t = x.cols() / batch;
  return ad::reshape(x, x.rows() * t, batch);
}

ad::Var unflatten_time(const ad::Var& x, int channels, int batch) {
  if (x.rows() % channels != 0)
    throw std::invalid_argument("unflatten_time: row count not divisible by channels");
  const int t = x.rows() / channels;
  if (x.cols() != batch) throw std::invalid_argument("unflatten_time: batch mismatch");
  return ad::reshape(x, channels, batch * t);
}

ad::Var renorm_limbs(const ad::Var& x, Real eps) {
  if (x.rows() % 3 != 0)
    throw std::invalid_argument("renorm_limbs: channel count not a multiple of 3");
  const int groups = (x.rows() / 3) * x.cols();
  ad::Var triples = ad::reshape(x, 3, groups);
  ad::Var norm_sq = ad::colsum(ad::cmul(triples, triples));
  ad::Var inv = ad::powc(ad::add_scalar(norm_sq, eps), -0.5);
  ad::Var scaled = ad::cmul(triples, ad::reprows(inv, 3));
  return ad::reshape(scaled, x.rows(), x.cols());
}

}  // namespace iat::nn
