#include "iat/pvae.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace iat::pvae {

namespace {

constexpr Real kSlope = 0.2;

VaeArch checked(VaeArch arch) {
  arch.validate();
  return arch;
}

ad::Var act(const ad::Var& x) { return ad::leaky_relu(x, kSlope); }

void ensure_finite(Real v, const char* label, int epoch) {
  if (!std::isfinite(v))
    throw std::runtime_error("pvae training diverged at epoch " + std::to_string(epoch) +
                             " (" + label + ")");
}

std::vector<ad::Var> concat(std::vector<ad::Var> a, const std::vector<ad::Var>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

void VaeArch::validate() const {
  if (channels < 1) throw std::invalid_argument("vae arch: channels must be >= 1");
  if (t < 8 || t % 8 != 0)
    throw std::invalid_argument("vae arch: t must be a positive multiple of 8, got " +
                                std::to_string(t));
  if (m < 1) throw std::invalid_argument("vae arch: latent dim must be >= 1");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("vae arch: hidden widths must be >= 1");
}

VaeNetwork::VaeNetwork(const VaeArch& arch, nn::ParamStore& store,
                       const std::string& prefix, Rng& init)
    : arch_(checked(arch)),
      enc1_(store, prefix + ".enc1", arch.channels, arch.hidden[0], 3, 2, 1, init),
      enc2_(store, prefix + ".enc2", arch.hidden[0], arch.hidden[1], 3, 2, 1, init),
      enc3_(store, prefix + ".enc3", arch.hidden[1], arch.hidden[2], 3, 2, 1, init),
      to_mu_(store, prefix + ".mu", arch.flat_dim(), arch.m, init),
      to_log_sig_(store, prefix + ".logsig", arch.flat_dim(), arch.m, init),
      expand_(store, prefix + ".expand", arch.m, arch.flat_dim(), init),
      dec1_(store, prefix + ".dec1", arch.hidden[2], arch.hidden[1], 3, 1, 1, init),
      dec2_(store, prefix + ".dec2", arch.hidden[1], arch.hidden[0], 3, 1, 1, init),
      dec3_(store, prefix + ".dec3", arch.hidden[0], arch.channels, 3, 1, 1, init) {}

VaeNetwork::Encoded VaeNetwork::encode_graph(const ad::Var& x, int batch) const {
  if (x.rows() != arch_.channels || x.cols() != batch * arch_.t)
    throw std::invalid_argument("encode: input is " + std::to_string(x.rows()) + "x" +
                                std::to_string(x.cols()) + ", expected " +
                                std::to_string(arch_.channels) + "x" +
                                std::to_string(batch * arch_.t));
  ad::Var y = act(enc1_.forward(x, batch));
  y = act(enc2_.forward(y, batch));
  y = act(enc3_.forward(y, batch));
  ad::Var flat = nn::flatten_time(y, batch);
  return {to_mu_.forward(flat), to_log_sig_.forward(flat)};
}

ad::Var VaeNetwork::decode_graph(const ad::Var& z, int batch) const {
  if (z.rows() != arch_.m || z.cols() != batch)
    throw std::invalid_argument("decode: latent is " + std::to_string(z.rows()) + "x" +
                                std::to_string(z.cols()) + ", expected " +
                                std::to_string(arch_.m) + "x" + std::to_string(batch));
  ad::Var y = act(expand_.forward(z));
  y = nn::unflatten_time(y, arch_.hidden[2], batch);
  y = act(dec1_.forward(nn::upsample2(y, batch), batch));
  y = act(dec2_.forward(nn::upsample2(y, batch), batch));
  return dec3_.forward(nn::upsample2(y, batch), batch);
}

std::pair<Vec, Vec> VaeNetwork::encode(const FlatAction& a) const {
  if (a.rows() != arch_.t || a.cols() != arch_.channels)
    throw std::invalid_argument("encode: action is " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + ", expected " +
                                std::to_string(arch_.t) + "x" +
                                std::to_string(arch_.channels));
  Encoded e = encode_graph(ad::constant(nn::pack_batch({a})), 1);
  return {e.mu.value().col(0), e.log_sig.value().col(0).array().exp().matrix()};
}

FlatAction VaeNetwork::decode(const Vec& z) const {
  ad::Var out = decode_graph(ad::constant(z), 1);
  return nn::unpack_batch(out.value(), 1)[0];
}

std::vector<ad::Var> VaeNetwork::encoder_params() const {
  return {enc1_.w, enc1_.b, enc2_.w,   enc2_.b,       enc3_.w,       enc3_.b,
          to_mu_.w, to_mu_.b, to_log_sig_.w, to_log_sig_.b};
}

std::vector<ad::Var> VaeNetwork::decoder_params() const {
  return {expand_.w, expand_.b, dec1_.w, dec1_.b, dec2_.w, dec2_.b, dec3_.w, dec3_.b};
}

PvaePair::PvaePair(const VaeArch& arch_in, std::uint64_t seed)
    : arch(checked(arch_in)),
      init_rng_(seed),
      vae_s_(arch, params, "s", init_rng_),
      vae_r_(arch, params, "r", init_rng_) {}

Real kl_divergence(const Vec& mu, const Vec& sigma) {
  if (mu.size() != sigma.size())
    throw std::invalid_argument("kl_divergence: mu/sigma size mismatch");
  if ((sigma.array() <= 0).any())
    throw std::invalid_argument("kl_divergence: sigma must be strictly positive");
  const auto s2 = sigma.array().square();
  return 0.5 * (mu.array().square() + s2 - 1.0 - s2.log()).sum();
}

Vec sample_latent(const Vec& mu, const Vec& sigma, Rng& rng) {
  if (mu.size() != sigma.size())
    throw std::invalid_argument("sample_latent: mu/sigma size mismatch");
  return mu + sigma.cwiseProduct(rng.gaussian_vec(static_cast<int>(mu.size())));
}

Real vae_loss(const FlatAction& a, const FlatAction& recon, const Vec& mu,
              const Vec& sigma, Real lambda_kl) {
  if (a.rows() != recon.rows() || a.cols() != recon.cols())
    throw std::invalid_argument("vae_loss: reconstruction shape mismatch");
  return (a - recon).squaredNorm() + lambda_kl * kl_divergence(mu, sigma);
}

ad::Var kl_divergence_graph(const ad::Var& mu, const ad::Var& log_sig) {
  // sigma^2 = exp(2 log sigma); log sigma^2 = 2 log sigma
  ad::Var s2 = ad::vexp(ad::smul(2.0, log_sig));
  ad::Var per = ad::cmul(mu, mu) + s2 - ad::smul(2.0, log_sig);
  return ad::smul(0.5, ad::add_scalar(ad::sum(per), -Real(mu.rows() * mu.cols())));
}

ad::Var vae_loss_graph(const ad::Var& x, const ad::Var& recon, const ad::Var& mu,
                       const ad::Var& log_sig, Real lambda_kl) {
  ad::Var diff = x - recon;
  return ad::sum(ad::cmul(diff, diff)) + ad::smul(lambda_kl, kl_divergence_graph(mu, log_sig));
}

void PvaeTrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("pvae config: epochs must be >= 1");
  if (lambda_kl < 0) throw std::invalid_argument("pvae config: lambda_kl must be >= 0");
  if (d < 1) throw std::invalid_argument("pvae config: d must be >= 1");
  if (m < d) throw std::invalid_argument("pvae config: latent dim must be >= d");
  if (rate <= 0 || rate_pe <= 0)
    throw std::invalid_argument("pvae config: rates must be positive");
}

PvaeResult train_pvaes(const PairedSet& a, const PvaeTrainConfig& config) {
  config.validate();
  if (a.pairs.empty()) throw std::invalid_argument("train_pvaes: empty paired set");
  a.validate();
  const int n = a.size();
  if (config.pe_enabled && n < config.d + 1)
    throw std::invalid_argument("train_pvaes: need at least d+1 pairs to fit the " +
                                std::to_string(config.d) + "-dim projection, got " +
                                std::to_string(n));

  VaeArch arch;
  arch.channels = a.channels();
  arch.t = a.frames();
  arch.m = config.m;
  arch.hidden = config.hidden;

  Rng root(config.seed);
  PvaeResult out{PvaePair(arch, root.fork(1).seed()), {}, {}, {}, {}, {}, {}, {}};
  Rng noise = root.fork(2);
  PvaePair& pair = out.pair;

  std::vector<FlatAction> stims, resps;
  stims.reserve(n);
  resps.reserve(n);
  for (const auto& p : a.pairs) {
    stims.push_back(p.stim);
    resps.push_back(p.resp);
  }
  const ad::Var xs = ad::constant(nn::pack_batch(stims));
  const ad::Var xr = ad::constant(nn::pack_batch(resps));

  nn::Adam opt_vae(pair.params.all(), config.rate);
  const std::vector<ad::Var> enc_params =
      concat(pair.vae_s().encoder_params(), pair.vae_r().encoder_params());
  nn::Adam opt_pe(enc_params, config.rate_pe);

  auto reconstruction_step = [&](const VaeNetwork& net, const ad::Var& x) {
    VaeNetwork::Encoded e = net.encode_graph(x, n);
    ad::Var eps = ad::constant(noise.gaussian_mat(arch.m, n));
    ad::Var z = e.mu + ad::cmul(ad::vexp(e.log_sig), eps);
    ad::Var recon = net.decode_graph(z, n);
    return vae_loss_graph(x, recon, e.mu, e.log_sig, config.lambda_kl);
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // step 1: one reconstruction update of each full autoencoder
    ad::Var loss_s = reconstruction_step(pair.vae_s(), xs);
    ad::Var loss_r = reconstruction_step(pair.vae_r(), xr);
    const Real lvs = ad::scalar_value(loss_s);
    const Real lvr = ad::scalar_value(loss_r);
    ensure_finite(lvs, "stimulative loss", epoch);
    ensure_finite(lvr, "responsive loss", epoch);
    out.history.vae_s.push_back(lvs);
    out.history.vae_r.push_back(lvr);
    opt_vae.step(ad::gradients(loss_s + loss_r, pair.params.all()));

    if (!config.pe_enabled) continue;

    // step 2: refit the per-role projections on current latent means, then
    // pull paired embeddings together through the encoders only
    VaeNetwork::Encoded es = pair.vae_s().encode_graph(xs, n);
    VaeNetwork::Encoded er = pair.vae_r().encode_graph(xr, n);
    pe::PcaProjection ps = pe::fit_pca(es.mu.value(), config.d);
    pe::PcaProjection pr = pe::fit_pca(er.mu.value(), config.d);
    ad::Var ls = ad::matmul(ad::constant(ps.p),
                            es.mu - ad::repcols(ad::constant(ps.mean), n));
    ad::Var lr = ad::matmul(ad::constant(pr.p),
                            er.mu - ad::repcols(ad::constant(pr.mean), n));
    ad::Var gap = ls - lr;
    ad::Var loss_pe = ad::sum(ad::cmul(gap, gap));
    const Real lp = ad::scalar_value(loss_pe);
    ensure_finite(lp, "paired-embedding loss", epoch);
    out.history.pe.push_back(lp);
    opt_pe.step(ad::gradients(loss_pe, enc_params));
  }

  // one consistent final pass: means, sigmas, and projections all from the
  // trained encoders
  VaeNetwork::Encoded es = pair.vae_s().encode_graph(xs, n);
  VaeNetwork::Encoded er = pair.vae_r().encode_graph(xr, n);
  out.mu_s = es.mu.value();
  out.mu_r = er.mu.value();
  out.sigma_s = es.log_sig.value().array().exp().matrix();
  out.sigma_r = er.log_sig.value().array().exp().matrix();
  if (n >= config.d + 1) {
    out.p_s = pe::fit_pca(out.mu_s, config.d);
    out.p_r = pe::fit_pca(out.mu_r, config.d);
  }
  return out;
}

}  // namespace iat::pvae
