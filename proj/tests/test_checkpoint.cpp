#include "iat/checkpoint.hpp"

#include "iat/datasets.hpp"
#include "iat/rng.hpp"
#include "iat/synth.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>

using namespace iat;

namespace {

PairedSet tiny_corpus(std::uint64_t seed) {
  SynthSpec spec;
  spec.k = 2;
  spec.per_class = 4;
  spec.t = 16;
  spec.seed = seed;
  SynthCorpus corpus = generate_synthetic(spec);
  return build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, seed + 1).a;
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("pvae checkpoint round-trips parameters, config, and projections") {
  PairedSet a = tiny_corpus(51);
  pvae::PvaeTrainConfig cfg;
  cfg.epochs = 2;
  cfg.d = 2;
  cfg.m = 8;
  cfg.hidden = {4, 5, 6};
  cfg.seed = 9;
  pvae::PvaeResult r = pvae::train_pvaes(a, cfg);

  TempFile file("tmp_ckpt_pvae.json");
  ckpt::save_pvae(r, cfg, file.path);
  ckpt::PvaeCheckpoint loaded = ckpt::load_pvae(file.path);

  CHECK(loaded.arch == r.pair.arch);
  CHECK(loaded.config.epochs == cfg.epochs);
  CHECK(loaded.config.lambda_kl == cfg.lambda_kl);
  CHECK(loaded.config.d == cfg.d);
  CHECK(loaded.config.rate == cfg.rate);
  CHECK(loaded.config.rate_pe == cfg.rate_pe);
  CHECK(loaded.config.pe_enabled == cfg.pe_enabled);
  CHECK(loaded.config.seed == cfg.seed);

  REQUIRE(loaded.pair.params.names() == r.pair.params.names());
  for (const std::string& name : r.pair.params.names())
    CHECK(loaded.pair.params.get(name).value() == r.pair.params.get(name).value());

  CHECK(loaded.p_s.d == r.p_s.d);
  CHECK(loaded.p_s.p == r.p_s.p);
  CHECK(loaded.p_s.mean == r.p_s.mean);
  CHECK(loaded.p_r.p == r.p_r.p);

  // the loaded encoder behaves identically
  const FlatAction& probe = a.pairs[0].stim;
  auto [mu0, sig0] = r.pair.vae_s().encode(probe);
  auto [mu1, sig1] = loaded.pair.vae_s().encode(probe);
  CHECK(mu0 == mu1);
  CHECK(sig0 == sig1);
}

TEST_CASE("act2act checkpoint round-trips and regenerates identically") {
  gan::GanArch arch;
  arch.channels = 6;
  arch.t = 8;
  arch.dim_c = 2;
  arch.dim_z = 3;
  arch.hidden = {4, 5, 6};
  gan::GanConfig cfg;
  cfg.dim_c = 2;
  cfg.dim_z = 3;
  cfg.hidden = {4, 5, 6};
  cfg.seed = 33;
  gan::GanResult r{gan::Act2ActModel(arch, cfg.seed), {}};

  TempFile file("tmp_ckpt_gan.json");
  ckpt::save_gan(r, cfg, file.path);
  ckpt::GanCheckpoint loaded = ckpt::load_gan(file.path);

  CHECK(loaded.arch == arch);
  CHECK(loaded.config.seed == cfg.seed);
  CHECK(loaded.config.epochs == cfg.epochs);
  REQUIRE(loaded.model.params.names() == r.model.params.names());
  for (const std::string& name : r.model.params.names())
    CHECK(loaded.model.params.get(name).value() == r.model.params.get(name).value());

  Rng data(5);
  FlatAction a_s = data.gaussian_mat(8, 6);
  CHECK(gan::generate_response(loaded.model.generator(), a_s, 77) ==
        gan::generate_response(r.model.generator(), a_s, 77));
}

TEST_CASE("checkpoint loading rejects bad inputs") {
  CHECK_THROWS_AS(ckpt::load_pvae("does_not_exist.json"), std::runtime_error);

  TempFile garbage("tmp_ckpt_garbage.json");
  std::ofstream(garbage.path) << "not json {";
  CHECK_THROWS_AS(ckpt::load_pvae(garbage.path), std::runtime_error);

  // a GAN checkpoint is not a PVAE checkpoint
  gan::GanArch arch;
  arch.channels = 6;
  arch.t = 8;
  arch.dim_c = 2;
  arch.dim_z = 3;
  arch.hidden = {4, 5, 6};
  gan::GanConfig cfg;
  cfg.dim_c = 2;
  cfg.dim_z = 3;
  cfg.hidden = {4, 5, 6};
  gan::GanResult r{gan::Act2ActModel(arch, 1), {}};
  TempFile crossed("tmp_ckpt_crossed.json");
  ckpt::save_gan(r, cfg, crossed.path);
  CHECK_THROWS_AS(ckpt::load_pvae(crossed.path), std::runtime_error);

  // dropping a parameter is detected
  TempFile tampered("tmp_ckpt_tampered.json");
  ckpt::save_gan(r, cfg, tampered.path);
  nlohmann::json doc;
  std::ifstream(tampered.path) >> doc;
  doc["params"].erase(doc["params"].begin());
  std::ofstream(tampered.path) << doc;
  CHECK_THROWS_AS(ckpt::load_gan(tampered.path), std::runtime_error);
}
