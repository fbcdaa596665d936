#pragma once

#include "iat/nn.hpp"
#include "iat/pe.hpp"
#include "iat/rng.hpp"
#include "iat/types.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace iat::pvae {

// Temporal-conv VAE over the (T x C) flat action layout. The encoder halves
// the time axis three times, so t must be a positive multiple of 8.
struct VaeArch {
  int channels = 0;
  int t = 0;
  int m = 32;
  std::array<int, 3> hidden = {64, 128, 256};

  void validate() const;
  int enc_t() const { return t / 8; }
  int flat_dim() const { return hidden[2] * enc_t(); }
  bool operator==(const VaeArch&) const = default;
};

// Encoder h: action -> (mu, log sigma); decoder g: latent -> reconstruction.
// Parameters live in a shared store under `prefix` so optimizers can slice
// encoder and decoder groups independently.
class VaeNetwork {
 public:
  VaeNetwork(const VaeArch& arch, nn::ParamStore& store, const std::string& prefix,
             Rng& init);

  struct Encoded {
    ad::Var mu;       // (m x B)
    ad::Var log_sig;  // (m x B)
  };
  // x: (channels x B*t) packed batch
  Encoded encode_graph(const ad::Var& x, int batch) const;
  // z: (m x B) -> (channels x B*t)
  ad::Var decode_graph(const ad::Var& z, int batch) const;

  // Single-action eager wrappers; second element of encode is sigma, not log.
  std::pair<Vec, Vec> encode(const FlatAction& a) const;
  FlatAction decode(const Vec& z) const;

  std::vector<ad::Var> encoder_params() const;
  std::vector<ad::Var> decoder_params() const;

  const VaeArch& arch() const { return arch_; }

 private:
  VaeArch arch_;
  nn::Conv1d enc1_, enc2_, enc3_;
  nn::Dense to_mu_, to_log_sig_, expand_;
  nn::Conv1d dec1_, dec2_, dec3_;
};

// The stimulative/responsive networks share one parameter store and one
// architecture.
struct PvaePair {
  VaeArch arch;
  nn::ParamStore params;

  PvaePair(const VaeArch& arch_in, std::uint64_t seed);

  const VaeNetwork& vae_s() const { return vae_s_; }
  const VaeNetwork& vae_r() const { return vae_r_; }

 private:
  Rng init_rng_;
  VaeNetwork vae_s_, vae_r_;
};

struct PvaeTrainConfig {
  int epochs = 200;
  Real lambda_kl = 1e-2;
  int d = 3;          // embedding dimension for the paired step
  Real rate = 1e-3;   // reconstruction step optimizer
  Real rate_pe = 1e-3;
  int m = 32;
  std::array<int, 3> hidden = {64, 128, 256};
  bool pe_enabled = true;  // false: plain independent VAE training (ablation)
  std::uint64_t seed = 17;

  void validate() const;
};

struct PvaeHistory {
  std::vector<Real> vae_s;
  std::vector<Real> vae_r;
  std::vector<Real> pe;  // empty when the paired step is disabled
};

struct PvaeResult {
  PvaePair pair;
  PvaeHistory history;
  // One consistent post-training encoder pass over the training set: latent
  // means/sigmas per pair column, and the projections fitted on those means.
  Mat mu_s, mu_r;        // (m x N)
  Mat sigma_s, sigma_r;  // (m x N)
  pe::PcaProjection p_s, p_r;
};

Real kl_divergence(const Vec& mu, const Vec& sigma);
Vec sample_latent(const Vec& mu, const Vec& sigma, Rng& rng);
Real vae_loss(const FlatAction& a, const FlatAction& recon, const Vec& mu,
              const Vec& sigma, Real lambda_kl);

// Graph-side pieces, shared by training and the gradient checks: summed over
// every column of the batch.
ad::Var kl_divergence_graph(const ad::Var& mu, const ad::Var& log_sig);
ad::Var vae_loss_graph(const ad::Var& x, const ad::Var& recon, const ad::Var& mu,
                       const ad::Var& log_sig, Real lambda_kl);

// Alternating two-step schedule: each epoch first updates both autoencoders
// on their summed reconstruction+KL losses, then refits the per-role PCA on
// the latent means and pulls paired embeddings together by updating the
// encoders only.
PvaeResult train_pvaes(const PairedSet& a, const PvaeTrainConfig& config);

}  // namespace iat::pvae
