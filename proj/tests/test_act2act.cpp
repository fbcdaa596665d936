#include "iat/act2act.hpp"

#include "iat/datasets.hpp"
#include "iat/rng.hpp"
#include "iat/skeleton.hpp"
#include "iat/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace iat;
using namespace iat::gan;

namespace {

GanArch tiny_arch() {
  GanArch arch;
  arch.channels = 6;
  arch.t = 8;
  arch.dim_c = 2;
  arch.dim_z = 3;
  arch.hidden = {4, 5, 6};
  return arch;
}

PairedSet tiny_corpus(std::uint64_t seed) {
  SynthSpec spec;
  spec.k = 2;
  spec.per_class = 4;
  spec.t = 16;
  spec.seed = seed;
  SynthCorpus corpus = generate_synthetic(spec);
  return build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, seed + 1).a;
}

}  // namespace

TEST_CASE("generator output is deterministic, shaped, and limb-normalized") {
  nn::ParamStore store;
  Rng init(3);
  Act2ActGenerator gen(tiny_arch(), store, "g", init);
  Rng data(5);
  FlatAction a_s = data.gaussian_mat(8, 6);
  Vec z = data.gaussian_vec(3);

  FlatAction out = gen.forward(a_s, z);
  CHECK(out.rows() == 8);
  CHECK(out.cols() == 6);
  CHECK(out.allFinite());
  CHECK(gen.forward(a_s, z) == out);

  for (int r = 0; r < out.rows(); ++r)
    for (int l = 0; l < 2; ++l)
      CHECK(out.row(r).segment(3 * l, 3).norm() == doctest::Approx(1.0).epsilon(1e-6));

  Vec z2 = data.gaussian_vec(3);
  CHECK((gen.forward(a_s, z2) - out).norm() > 0.0);

  CHECK_THROWS_AS(gen.forward(Mat(6, 8), z), std::invalid_argument);
  CHECK_THROWS_AS(gen.forward(a_s, Vec::Zero(4)), std::invalid_argument);
}

TEST_CASE("critic scores are finite and deterministic") {
  nn::ParamStore store;
  Rng init(7);
  PairDiscriminator critic(tiny_arch(), store, "d", init);
  Rng data(9);
  FlatAction a = data.gaussian_mat(8, 6), b = data.gaussian_mat(8, 6);
  const Real s = critic.forward(a, b);
  CHECK(std::isfinite(s));
  CHECK(critic.forward(a, b) == s);
  CHECK(critic.forward(b, a) != s);  // order matters: channels are stacked
  CHECK_THROWS_AS(critic.forward(Mat(6, 8), b), std::invalid_argument);
}

TEST_CASE("gradient penalty is nonnegative and one for a silent critic") {
  nn::ParamStore store;
  Rng init(11);
  PairDiscriminator critic(tiny_arch(), store, "d", init);
  Rng data(13);
  FlatAction stim = data.gaussian_mat(8, 6);
  FlatAction real = data.gaussian_mat(8, 6);
  FlatAction fake = data.gaussian_mat(8, 6);
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    CHECK(gradient_penalty(critic, stim, real, fake, seed) >= 0.0);

  for (const ad::Var& p : critic.params()) p.node()->value.setZero();
  CHECK(gradient_penalty(critic, stim, real, fake, 3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gradient penalty matches a finite-difference gradient norm") {
  nn::ParamStore store;
  Rng init(17);
  PairDiscriminator critic(tiny_arch(), store, "d", init);
  Rng data(19);
  const Mat stim = data.gaussian_mat(6, 8);
  const Mat real = data.gaussian_mat(6, 8);
  const Mat fake = data.gaussian_mat(6, 8);

  const std::uint64_t seed = 23;
  Rng gp_rng(seed);
  ad::Var penalty = gradient_penalty_graph(critic, stim, real, fake, 1, gp_rng);

  // oracle: rebuild the same interpolate, then estimate the input gradient
  // entry by entry with central differences
  Rng mix_rng(seed);
  const Real eps = mix_rng.uniform();
  Mat joint(12, 8);
  joint.topRows(6) = stim;
  joint.bottomRows(6) = eps * real + (1 - eps) * fake;

  auto score_at = [&](const Mat& m) {
    return ad::scalar_value(critic.forward_packed(ad::constant(m), 1));
  };
  const Real h = 1e-5;
  Real sq_norm = 0;
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 8; ++c) {
      Mat up = joint, down = joint;
      up(r, c) += h;
      down(r, c) -= h;
      const Real g = (score_at(up) - score_at(down)) / (2 * h);
      sq_norm += g * g;
    }
  const Real expected = (std::sqrt(sq_norm) - 1.0) * (std::sqrt(sq_norm) - 1.0);
  CHECK(std::abs(ad::scalar_value(penalty) - expected) < 1e-3);
}

TEST_CASE("training runs, records history, and assembles only adversarial terms") {
  PairedSet a = tiny_corpus(29);
  GanConfig config;
  config.epochs = 2;
  config.critic_steps = 2;
  config.batch_size = 0;  // full set
  config.seed = 31;
  GanResult r = train_act2act(a, config);

  CHECK(r.history.critic.size() == 2);
  CHECK(r.history.generator.size() == 2);
  for (Real v : r.history.critic) CHECK(std::isfinite(v));
  for (Real v : r.history.generator) CHECK(std::isfinite(v));

  std::vector<std::string> terms = r.history.loss_terms;
  std::sort(terms.begin(), terms.end());
  const std::vector<std::string> expected = {"critic/fake_score", "critic/gradient_penalty",
                                             "critic/real_score", "generator/fake_score"};
  CHECK(terms == expected);
  for (const auto& t : terms) {
    CHECK(t.find("recon") == std::string::npos);
    CHECK(t.find("l2") == std::string::npos);
  }

  // the extra epoch moves the generator
  GanConfig two = config;
  two.epochs = 1;
  GanResult r1 = train_act2act(a, two);
  const FlatAction probe = a.pairs[0].stim;
  CHECK((generate_response(r.model.generator(), probe, 41) -
         generate_response(r1.model.generator(), probe, 41))
            .norm() > 0.0);
}

TEST_CASE("degenerate configuration still trains") {
  PairedSet a = tiny_corpus(37);
  GanConfig config;
  config.epochs = 1;
  config.critic_steps = 1;
  config.lambda_gp = 0.0;
  config.batch_size = 2;
  config.seed = 43;
  GanResult r = train_act2act(a, config);
  CHECK(r.history.critic.size() == 1);
  CHECK(std::isfinite(r.history.critic[0]));
}

TEST_CASE("training is seed-deterministic") {
  PairedSet a = tiny_corpus(47);
  GanConfig config;
  config.epochs = 2;
  config.critic_steps = 2;
  config.batch_size = 3;
  config.seed = 53;
  GanResult r1 = train_act2act(a, config);
  GanResult r2 = train_act2act(a, config);
  CHECK(r1.history.critic == r2.history.critic);
  CHECK(r1.history.generator == r2.history.generator);

  config.seed = 54;
  GanResult r3 = train_act2act(a, config);
  CHECK(r1.history.critic != r3.history.critic);
}

TEST_CASE("divergence raises with the epoch index") {
  PairedSet a = tiny_corpus(59);
  GanConfig config;
  config.epochs = 8;
  config.critic_steps = 2;
  config.rate = 1e120;
  config.seed = 61;
  CHECK_THROWS_WITH_AS(train_act2act(a, config), doctest::Contains("diverged"),
                       std::runtime_error);
}

TEST_CASE("training preconditions") {
  PairedSet empty;
  CHECK_THROWS_AS(train_act2act(empty, GanConfig{}), std::invalid_argument);
  PairedSet a = tiny_corpus(67);
  GanConfig bad;
  bad.critic_steps = 0;
  CHECK_THROWS_AS(train_act2act(a, bad), std::invalid_argument);
  bad = GanConfig{};
  bad.lambda_gp = -1;
  CHECK_THROWS_AS(train_act2act(a, bad), std::invalid_argument);
}

TEST_CASE("generated responses reproduce, differ across seeds, and rebuild poses") {
  PairedSet a = tiny_corpus(71);
  GanConfig config;
  config.epochs = 1;
  config.critic_steps = 1;
  config.seed = 73;
  GanResult r = train_act2act(a, config);
  const FlatAction stim = a.pairs[1].stim;

  FlatAction g1 = generate_response(r.model.generator(), stim, 101);
  CHECK(generate_response(r.model.generator(), stim, 101) == g1);
  FlatAction g2 = generate_response(r.model.generator(), stim, 102);
  FlatAction g3 = generate_response(r.model.generator(), stim, 103);
  CHECK((g1 - g2).norm() > 0.0);
  CHECK((g1 - g3).norm() > 0.0);
  CHECK((g2 - g3).norm() > 0.0);

  // a generated response is a valid limb sequence: kinematics accepts it
  SynthSpec spec;
  LimbSequence seq = from_flat(g1, spec.topology);
  Vec lengths = default_upper_body_limb_lengths();
  Mat root = Mat::Zero(g1.rows(), 3);
  ActionClip clip = limbs_to_joints(seq, lengths, root);
  CHECK(clip.frames.allFinite());
}
