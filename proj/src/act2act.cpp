#include "iat/act2act.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace iat::gan {

namespace {

constexpr Real kSlope = 0.2;

GanArch checked(GanArch arch) {
  arch.validate();
  return arch;
}

ad::Var act(const ad::Var& x) { return ad::leaky_relu(x, kSlope); }

ad::Var batch_mean(const ad::Var& scores, int batch) {
  return ad::smul(Real(1) / batch, ad::sum(scores));
}

void ensure_finite(Real v, const char* label, int epoch) {
  if (!std::isfinite(v))
    throw std::runtime_error("act2act training diverged at epoch " +
                             std::to_string(epoch) + " (" + std::string(label) + ")");
}

}  // namespace

void GanArch::validate() const {
  if (channels < 3 || channels % 3 != 0)
    throw std::invalid_argument("gan arch: channels must be a positive multiple of 3");
  if (t < 8 || t % 8 != 0)
    throw std::invalid_argument("gan arch: t must be a positive multiple of 8, got " +
                                std::to_string(t));
  if (dim_c < 1 || dim_z < 0)
    throw std::invalid_argument("gan arch: dim_c must be >= 1 and dim_z >= 0");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("gan arch: hidden widths must be >= 1");
}

Act2ActGenerator::Act2ActGenerator(const GanArch& arch, nn::ParamStore& store,
                                   const std::string& prefix, Rng& init)
    : arch_(checked(arch)),
      e1_(store, prefix + ".e1", arch.channels, arch.hidden[0], 3, 2, 1, init),
      e2_(store, prefix + ".e2", arch.hidden[0], arch.hidden[1], 3, 2, 1, init),
      e3_(store, prefix + ".e3", arch.hidden[1], arch.hidden[2], 3, 2, 1, init),
      to_code_(store, prefix + ".code", arch.flat_dim(), arch.dim_c, init),
      expand_(store, prefix + ".expand", arch.dim_c + arch.dim_z, arch.flat_dim(), init),
      d1_(store, prefix + ".d1", arch.hidden[2], arch.hidden[1], 3, 1, 1, init),
      d2_(store, prefix + ".d2", arch.hidden[1], arch.hidden[0], 3, 1, 1, init),
      d3_(store, prefix + ".d3", arch.hidden[0], arch.channels, 3, 1, 1, init) {}

ad::Var Act2ActGenerator::encode_graph(const ad::Var& stim, int batch) const {
  if (stim.rows() != arch_.channels || stim.cols() != batch * arch_.t)
    throw std::invalid_argument("generator encode: input is " + std::to_string(stim.rows()) +
                                "x" + std::to_string(stim.cols()) + ", expected " +
                                std::to_string(arch_.channels) + "x" +
                                std::to_string(batch * arch_.t));
  ad::Var y = act(e1_.forward(stim, batch));
  y = act(e2_.forward(y, batch));
  y = act(e3_.forward(y, batch));
  return to_code_.forward(nn::flatten_time(y, batch));
}

ad::Var Act2ActGenerator::decode_graph(const ad::Var& code, const ad::Var& z,
                                       int batch) const {
  if (code.rows() != arch_.dim_c || code.cols() != batch)
    throw std::invalid_argument("generator decode: bad code shape");
  if (z.rows() != arch_.dim_z || z.cols() != batch)
    throw std::invalid_argument("generator decode: bad noise shape");
  ad::Var y = act(expand_.forward(ad::vcat(code, z)));
  y = nn::unflatten_time(y, arch_.hidden[2], batch);
  y = act(d1_.forward(nn::upsample2(y, batch), batch));
  y = act(d2_.forward(nn::upsample2(y, batch), batch));
  y = d3_.forward(nn::upsample2(y, batch), batch);
  return nn::renorm_limbs(y);
}

ad::Var Act2ActGenerator::forward_graph(const ad::Var& stim, const ad::Var& z,
                                        int batch) const {
  return decode_graph(encode_graph(stim, batch), z, batch);
}

FlatAction Act2ActGenerator::forward(const FlatAction& a_s, const Vec& z) const {
  if (a_s.rows() != arch_.t || a_s.cols() != arch_.channels)
    throw std::invalid_argument("generator forward: action is " +
                                std::to_string(a_s.rows()) + "x" +
                                std::to_string(a_s.cols()) + ", expected " +
                                std::to_string(arch_.t) + "x" +
                                std::to_string(arch_.channels));
  if (z.size() != arch_.dim_z)
    throw std::invalid_argument("generator forward: noise dim " + std::to_string(z.size()) +
                                ", expected " + std::to_string(arch_.dim_z));
  ad::Var out = forward_graph(ad::constant(nn::pack_batch({a_s})), ad::constant(z), 1);
  return nn::unpack_batch(out.value(), 1)[0];
}

std::vector<ad::Var> Act2ActGenerator::params() const {
  return {e1_.w, e1_.b, e2_.w, e2_.b, e3_.w, e3_.b, to_code_.w, to_code_.b,
          expand_.w, expand_.b, d1_.w, d1_.b, d2_.w, d2_.b, d3_.w, d3_.b};
}

PairDiscriminator::PairDiscriminator(const GanArch& arch, nn::ParamStore& store,
                                     const std::string& prefix, Rng& init)
    : arch_(checked(arch)),
      c1_(store, prefix + ".c1", 2 * arch.channels, arch.hidden[0], 3, 2, 1, init),
      c2_(store, prefix + ".c2", arch.hidden[0], arch.hidden[1], 3, 2, 1, init),
      c3_(store, prefix + ".c3", arch.hidden[1], arch.hidden[2], 3, 2, 1, init),
      head_(store, prefix + ".head", arch.flat_dim(), 1, init) {}

ad::Var PairDiscriminator::forward_packed(const ad::Var& joint, int batch) const {
  if (joint.rows() != 2 * arch_.channels || joint.cols() != batch * arch_.t)
    throw std::invalid_argument("critic: joint input is " + std::to_string(joint.rows()) +
                                "x" + std::to_string(joint.cols()) + ", expected " +
                                std::to_string(2 * arch_.channels) + "x" +
                                std::to_string(batch * arch_.t));
  ad::Var y = act(c1_.forward(joint, batch));
  y = act(c2_.forward(y, batch));
  y = act(c3_.forward(y, batch));
  return head_.forward(nn::flatten_time(y, batch));
}

ad::Var PairDiscriminator::forward_graph(const ad::Var& stim, const ad::Var& resp,
                                         int batch) const {
  return forward_packed(ad::vcat(stim, resp), batch);
}

Real PairDiscriminator::forward(const FlatAction& a_s, const FlatAction& a_x) const {
  if (a_s.rows() != arch_.t || a_s.cols() != arch_.channels || a_x.rows() != arch_.t ||
      a_x.cols() != arch_.channels)
    throw std::invalid_argument("critic forward: actions must be " +
                                std::to_string(arch_.t) + "x" +
                                std::to_string(arch_.channels));
  ad::Var score = forward_graph(ad::constant(nn::pack_batch({a_s})),
                                ad::constant(nn::pack_batch({a_x})), 1);
  return ad::scalar_value(score);
}

std::vector<ad::Var> PairDiscriminator::params() const {
  return {c1_.w, c1_.b, c2_.w, c2_.b, c3_.w, c3_.b, head_.w, head_.b};
}

Act2ActModel::Act2ActModel(const GanArch& arch_in, std::uint64_t seed)
    : arch(checked(arch_in)),
      init_rng_(seed),
      generator_(arch, params, "g", init_rng_),
      critic_(arch, params, "d", init_rng_) {}

void GanConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("gan config: epochs must be >= 1");
  if (critic_steps < 1) throw std::invalid_argument("gan config: critic_steps must be >= 1");
  if (lambda_gp < 0) throw std::invalid_argument("gan config: lambda_gp must be >= 0");
  if (rate <= 0) throw std::invalid_argument("gan config: rate must be positive");
  if (dim_c < 1 || dim_z < 0)
    throw std::invalid_argument("gan config: dim_c must be >= 1 and dim_z >= 0");
}

ad::Var gradient_penalty_graph(const PairDiscriminator& d, const Mat& stim,
                               const Mat& real_resp, const Mat& fake_resp, int batch,
                               Rng& rng) {
  const int c = d.arch().channels;
  const int t = d.arch().t;
  if (stim.rows() != c || real_resp.rows() != c || fake_resp.rows() != c ||
      stim.cols() != batch * t || real_resp.cols() != stim.cols() ||
      fake_resp.cols() != stim.cols())
    throw std::invalid_argument("gradient_penalty: inconsistent batch shapes");

  Mat joint(2 * c, batch * t);
  joint.topRows(c) = stim;
  for (int b = 0; b < batch; ++b) {
    const Real eps = rng.uniform();
    joint.block(c, b * t, c, t) = eps * real_resp.middleCols(b * t, t) +
                                  (1 - eps) * fake_resp.middleCols(b * t, t);
  }

  ad::Var input(joint, true);
  ad::Var score = d.forward_packed(input, batch);
  ad::Var grad = ad::gradients(ad::sum(score), {input})[0];  // (2c x batch*t)
  ad::Var sq_cols = ad::colsum(ad::cmul(grad, grad));        // (1 x batch*t)
  ad::Var sq_norms = ad::colsum(ad::reshape(sq_cols, t, batch));  // (1 x batch)
  ad::Var dev = ad::add_scalar(ad::powc(sq_norms, 0.5), -1.0);
  return ad::smul(Real(1) / batch, ad::sum(ad::cmul(dev, dev)));
}

Real gradient_penalty(const PairDiscriminator& d, const FlatAction& stim,
                      const FlatAction& real_resp, const FlatAction& fake_resp,
                      std::uint64_t seed) {
  Rng rng(seed);
  return ad::scalar_value(gradient_penalty_graph(d, nn::pack_batch({stim}),
                                                 nn::pack_batch({real_resp}),
                                                 nn::pack_batch({fake_resp}), 1, rng));
}

GanResult train_act2act(const PairedSet& pairs, const GanConfig& config) {
  config.validate();
  if (pairs.pairs.empty()) throw std::invalid_argument("train_act2act: empty paired set");
  pairs.validate();

  GanArch arch;
  arch.channels = pairs.channels();
  arch.t = pairs.frames();
  arch.dim_c = config.dim_c;
  arch.dim_z = config.dim_z;
  arch.hidden = config.hidden;

  Rng root(config.seed);
  GanResult out{Act2ActModel(arch, root.fork(1).seed()), {}};
  Rng noise = root.fork(2);
  Rng pick = root.fork(3);
  const Act2ActGenerator& gen = out.model.generator();
  const PairDiscriminator& critic = out.model.critic();

  const int n = pairs.size();
  const int t = arch.t;
  const int bs = (config.batch_size <= 0 || config.batch_size > n) ? n : config.batch_size;
  const int iters = (n + bs - 1) / bs;

  Mat all_stim(arch.channels, n * t), all_resp(arch.channels, n * t);
  for (int i = 0; i < n; ++i) {
    all_stim.middleCols(i * t, t) = pairs.pairs[i].stim.transpose();
    all_resp.middleCols(i * t, t) = pairs.pairs[i].resp.transpose();
  }
  auto take = [&](const Mat& pool, const std::vector<int>& idx) {
    Mat batch(arch.channels, static_cast<long>(idx.size()) * t);
    for (size_t j = 0; j < idx.size(); ++j)
      batch.middleCols(static_cast<long>(j) * t, t) = pool.middleCols(idx[j] * t, t);
    return batch;
  };
  auto draw_indices = [&]() {
    std::vector<int> idx(bs);
    for (int& i : idx) i = pick.uniform_int(n);
    return idx;
  };

  nn::Adam opt_critic(critic.params(), config.rate, config.beta1, config.beta2);
  nn::Adam opt_gen(gen.params(), config.rate, config.beta1, config.beta2);

  auto record_term = [&](const char* name) {
    for (const auto& existing : out.history.loss_terms)
      if (existing == name) return;
    out.history.loss_terms.push_back(name);
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Real critic_sum = 0, gen_sum = 0;
    for (int iter = 0; iter < iters; ++iter) {
      for (int k = 0; k < config.critic_steps; ++k) {
        const std::vector<int> idx = draw_indices();
        const Mat stim_b = take(all_stim, idx);
        const Mat resp_b = take(all_resp, idx);
        const Mat z = noise.gaussian_mat(arch.dim_z, bs);
        // generated responses enter the critic step as constants
        const Mat fake =
            gen.forward_graph(ad::constant(stim_b), ad::constant(z), bs).value();

        ad::Var real_score = batch_mean(
            critic.forward_graph(ad::constant(stim_b), ad::constant(resp_b), bs), bs);
        record_term("critic/real_score");
        ad::Var fake_score = batch_mean(
            critic.forward_graph(ad::constant(stim_b), ad::constant(fake), bs), bs);
        record_term("critic/fake_score");
        ad::Var penalty = gradient_penalty_graph(critic, stim_b, resp_b, fake, bs, noise);
        record_term("critic/gradient_penalty");
        ad::Var critic_loss = fake_score - real_score + ad::smul(config.lambda_gp, penalty);

        const Real lc = ad::scalar_value(critic_loss);
        ensure_finite(lc, "critic loss", epoch);
        critic_sum += lc;
        opt_critic.step(ad::gradients(critic_loss, critic.params()));
      }

      const std::vector<int> idx = draw_indices();
      const Mat stim_b = take(all_stim, idx);
      const Mat z = noise.gaussian_mat(arch.dim_z, bs);
      ad::Var fake = gen.forward_graph(ad::constant(stim_b), ad::constant(z), bs);
      ad::Var gen_loss = ad::neg(batch_mean(critic.forward_graph(ad::constant(stim_b), fake, bs), bs));
      record_term("generator/fake_score");

      const Real lg = ad::scalar_value(gen_loss);
      ensure_finite(lg, "generator loss", epoch);
      gen_sum += lg;
      opt_gen.step(ad::gradients(gen_loss, gen.params()));
    }
    out.history.critic.push_back(critic_sum / (iters * config.critic_steps));
    out.history.generator.push_back(gen_sum / iters);
  }
  return out;
}

FlatAction generate_response(const Act2ActGenerator& g, const FlatAction& a_s,
                             std::uint64_t seed) {
  Rng rng(seed);
  return g.forward(a_s, rng.gaussian_vec(g.arch().dim_z));
}

}  // namespace iat::gan
