#pragma once

#include "iat/nn.hpp"
#include "iat/rng.hpp"
#include "iat/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace iat::gan {

// Shared shape descriptor for the generator and the pair critic. The conv
// stacks halve the time axis three times, so t must be a multiple of 8, and
// the generator renormalizes limb triples, so channels must be a multiple
// of 3.
struct GanArch {
  int channels = 0;
  int t = 0;
  int dim_c = 8;
  int dim_z = 16;
  std::array<int, 3> hidden = {32, 64, 96};

  void validate() const;
  int enc_t() const { return t / 8; }
  int flat_dim() const { return hidden[2] * enc_t(); }
  bool operator==(const GanArch&) const = default;
};

// Stimulation -> low-dimension code c; (c, z) -> response. The noise vector
// enters at the decoder input only, and the final stage renormalizes every
// limb triple, so outputs are always valid limb representations.
class Act2ActGenerator {
 public:
  Act2ActGenerator(const GanArch& arch, nn::ParamStore& store, const std::string& prefix,
                   Rng& init);

  ad::Var encode_graph(const ad::Var& stim, int batch) const;  // (dim_c x B)
  ad::Var decode_graph(const ad::Var& code, const ad::Var& z, int batch) const;
  ad::Var forward_graph(const ad::Var& stim, const ad::Var& z, int batch) const;

  FlatAction forward(const FlatAction& a_s, const Vec& z) const;

  std::vector<ad::Var> params() const;
  const GanArch& arch() const { return arch_; }

 private:
  GanArch arch_;
  nn::Conv1d e1_, e2_, e3_;
  nn::Dense to_code_, expand_;
  nn::Conv1d d1_, d2_, d3_;
};

// Wasserstein critic on channel-concatenated (stimulation, response) pairs;
// unbounded scalar score per pair.
class PairDiscriminator {
 public:
  PairDiscriminator(const GanArch& arch, nn::ParamStore& store, const std::string& prefix,
                    Rng& init);

  // joint: (2*channels x B*t), stimulation rows stacked above response rows
  ad::Var forward_packed(const ad::Var& joint, int batch) const;  // (1 x B)
  ad::Var forward_graph(const ad::Var& stim, const ad::Var& resp, int batch) const;

  Real forward(const FlatAction& a_s, const FlatAction& a_x) const;

  std::vector<ad::Var> params() const;
  const GanArch& arch() const { return arch_; }

 private:
  GanArch arch_;
  nn::Conv1d c1_, c2_, c3_;
  nn::Dense head_;
};

struct GanConfig {
  int epochs = 120;
  int critic_steps = 5;
  Real lambda_gp = 10.0;
  Real rate = 1e-4;
  Real beta1 = 0.0;  // momentum settings standard for gradient-penalty critics
  Real beta2 = 0.9;
  int dim_c = 8;
  int dim_z = 16;
  std::array<int, 3> hidden = {32, 64, 96};
  int batch_size = 32;  // <= 0 means full set
  std::uint64_t seed = 17;

  void validate() const;
};

struct GanHistory {
  std::vector<Real> critic;     // per-epoch mean critic objective
  std::vector<Real> generator;  // per-epoch mean generator objective
  // every term assembled into a training loss, recorded at assembly time
  std::vector<std::string> loss_terms;
};

struct Act2ActModel {
  GanArch arch;
  nn::ParamStore params;

  Act2ActModel(const GanArch& arch_in, std::uint64_t seed);

  const Act2ActGenerator& generator() const { return generator_; }
  const PairDiscriminator& critic() const { return critic_; }

 private:
  Rng init_rng_;
  Act2ActGenerator generator_;
  PairDiscriminator critic_;
};

struct GanResult {
  Act2ActModel model;
  GanHistory history;
};

// Unit-gradient-norm penalty at per-sample random interpolates: epsilon mixes
// the real and generated responses (stimulation rows held fixed), and the
// norm is taken over the critic's full joint input. Mean over the batch.
ad::Var gradient_penalty_graph(const PairDiscriminator& d, const Mat& stim,
                               const Mat& real_resp, const Mat& fake_resp, int batch,
                               Rng& rng);
Real gradient_penalty(const PairDiscriminator& d, const FlatAction& stim,
                      const FlatAction& real_resp, const FlatAction& fake_resp,
                      std::uint64_t seed);

// Alternating Wasserstein training: critic_steps critic updates per generator
// update, gradient penalty on interpolates, and no reconstruction term
// anywhere in the loss assembly.
GanResult train_act2act(const PairedSet& pairs, const GanConfig& config);

// z sampled from a seeded unit Gaussian, then generator forward.
FlatAction generate_response(const Act2ActGenerator& g, const FlatAction& a_s,
                             std::uint64_t seed);

}  // namespace iat::gan
