#include "iat/iat_metrics.hpp"

#include "iat/datasets.hpp"
#include "iat/rng.hpp"
#include "iat/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

using namespace iat;
using namespace iat::metrics;

namespace {

ClassifierConfig tiny_config() {
  ClassifierConfig cfg;
  cfg.epochs = 150;
  cfg.rate = 2e-3;
  cfg.batch_size = 0;
  cfg.hidden = {8, 12, 16};
  return cfg;
}

struct Fixture {
  PairedSet a;
  std::vector<FlatPair> pos;
  std::vector<FlatPair> neg;
};

// Matched pairs from the training split; positives/negatives materialized
// from the held-out cross product.
Fixture fixture() {
  SynthSpec spec;
  spec.k = 2;
  spec.per_class = 12;
  spec.t = 16;
  spec.seed = 21;
  SynthCorpus corpus = generate_synthetic(spec);
  BuiltSets sets = build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, 22);
  derive_pos_neg(sets.b, corpus.rules, 12, 23);
  Fixture f;
  f.a = std::move(sets.a);
  f.pos = sets.b.materialize(sets.b.pos_pairs);
  f.neg = sets.b.materialize(sets.b.neg_pairs);
  return f;
}

GeneratedSet wrap_generated(const std::vector<FlatPair>& pairs) {
  GeneratedSet bg;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    GeneratedPair p;
    p.stim = pairs[i].first;
    p.resp = pairs[i].second;
    p.stim_id = "s" + std::to_string(i);
    p.stim_category = "stim_00";
    p.seed = i;
    bg.pairs.push_back(std::move(p));
  }
  return bg;
}

}  // namespace

TEST_CASE("classifier scoring is deterministic and bounded") {
  gan::GanArch arch;
  arch.channels = 6;
  arch.t = 8;
  arch.hidden = {4, 5, 6};
  PairClassifier e(arch, 3);
  CHECK(e.training_tag() == "untrained");

  Rng data(5);
  FlatAction s = data.gaussian_mat(8, 6);
  FlatAction r = data.gaussian_mat(8, 6);
  const Real p = e.probability(s, r);
  CHECK(p >= 0.0);
  CHECK(p <= 1.0);
  CHECK(e.probability(s, r) == p);
  const int label = e.classify(s, r);
  CHECK((label == 0 || label == 1));
  CHECK(label == (p > 0.5 ? 1 : 0));

  PairClassifier same(arch, 3);
  CHECK(same.probability(s, r) == p);
  PairClassifier other(arch, 4);
  CHECK(other.probability(s, r) != p);
}

TEST_CASE("cross-validation report aggregates fold accuracies") {
  Fixture f = fixture();
  ClassifierResult res = train_pair_classifier(f.pos, f.neg, 3, tiny_config(), 11);

  REQUIRE(res.cv.folds.size() == 3);
  Real mean = 0;
  for (Real a : res.cv.folds) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    mean += a;
  }
  mean /= 3;
  CHECK(res.cv.mean == doctest::Approx(mean).epsilon(1e-12));
  Real var = 0;
  for (Real a : res.cv.folds) var += (a - mean) * (a - mean);
  CHECK(res.cv.std_dev == doctest::Approx(std::sqrt(var / 3)).epsilon(1e-10));
  CHECK(res.classifier.training_tag() == "real-pairs");
}

TEST_CASE("matched and mismatched pairs are separable") {
  Fixture f = fixture();
  ClassifierConfig cfg = tiny_config();
  ClassifierResult res = train_pair_classifier(f.pos, f.neg, 3, cfg, 11);
  CHECK(res.cv.mean >= 0.9);

  Real pos_mean = 0, neg_mean = 0;
  for (const auto& p : f.pos) pos_mean += res.classifier.probability(p.first, p.second);
  for (const auto& p : f.neg) neg_mean += res.classifier.probability(p.first, p.second);
  pos_mean /= static_cast<Real>(f.pos.size());
  neg_mean /= static_cast<Real>(f.neg.size());
  CHECK(pos_mean > neg_mean + 0.2);
}

TEST_CASE("two samples of the same class score near chance") {
  Fixture f = fixture();
  REQUIRE(f.pos.size() >= 12);
  const std::size_t half = f.pos.size() / 2;
  std::vector<FlatPair> first(f.pos.begin(), f.pos.begin() + half);
  std::vector<FlatPair> second(f.pos.begin() + half, f.pos.end());
  ClassifierResult res = train_pair_classifier(first, second, 3, tiny_config(), 5);
  CHECK(res.cv.mean >= 0.2);
  CHECK(res.cv.mean <= 0.8);
}

TEST_CASE("classifier training is reproducible") {
  Fixture f = fixture();
  ClassifierConfig cfg = tiny_config();
  cfg.epochs = 10;
  ClassifierResult one = train_pair_classifier(f.pos, f.neg, 3, cfg, 7);
  ClassifierResult two = train_pair_classifier(f.pos, f.neg, 3, cfg, 7);
  CHECK(one.cv.folds == two.cv.folds);
  const FlatPair& probe = f.pos[0];
  CHECK(one.classifier.probability(probe.first, probe.second) ==
        two.classifier.probability(probe.first, probe.second));

  ClassifierResult three = train_pair_classifier(f.pos, f.neg, 3, cfg, 8);
  CHECK(three.classifier.probability(probe.first, probe.second) !=
        one.classifier.probability(probe.first, probe.second));
}

TEST_CASE("training preconditions are enforced") {
  Fixture f = fixture();
  ClassifierConfig cfg = tiny_config();
  CHECK_THROWS_AS(train_pair_classifier({}, f.neg, 3, cfg, 1), std::invalid_argument);
  CHECK_THROWS_AS(train_pair_classifier(f.pos, {}, 3, cfg, 1), std::invalid_argument);
  CHECK_THROWS_AS(train_pair_classifier(f.pos, f.neg, 1, cfg, 1), std::invalid_argument);
  std::vector<FlatPair> two(f.pos.begin(), f.pos.begin() + 2);
  CHECK_THROWS_AS(train_pair_classifier(two, f.neg, 3, cfg, 1), std::invalid_argument);

  ClassifierConfig bad = cfg;
  bad.epochs = 0;
  CHECK_THROWS_AS(train_pair_classifier(f.pos, f.neg, 3, bad, 1), std::invalid_argument);
  bad = cfg;
  bad.rate = 0;
  CHECK_THROWS_AS(train_pair_classifier(f.pos, f.neg, 3, bad, 1), std::invalid_argument);
  bad = cfg;
  bad.hidden = {0, 12, 16};
  CHECK_THROWS_AS(train_pair_classifier(f.pos, f.neg, 3, bad, 1), std::invalid_argument);
}

TEST_CASE("generated set derives one seed per response") {
  SynthSpec spec;
  spec.k = 2;
  spec.per_class = 4;
  spec.t = 16;
  spec.seed = 31;
  SynthCorpus corpus = generate_synthetic(spec);
  BuiltSets sets = build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, 32);
  std::vector<EvalInstance> stims;
  for (const auto& inst : sets.b.instances)
    if (inst.role == Role::stimulative) stims.push_back(inst);
  REQUIRE(stims.size() >= 2);

  gan::GanArch arch;
  arch.channels = sets.a.channels();
  arch.t = sets.a.frames();
  arch.dim_c = 2;
  arch.dim_z = 3;
  arch.hidden = {4, 5, 6};
  nn::ParamStore store;
  Rng init(9);
  gan::Act2ActGenerator g(arch, store, "g", init);

  GeneratedSet bg = build_generated_set(g, stims, 3, 41);
  CHECK(bg.size() == static_cast<int>(stims.size()) * 3);
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < bg.pairs.size(); ++i) {
    const GeneratedPair& p = bg.pairs[i];
    const EvalInstance& src = stims[i / 3];
    CHECK(p.stim == src.action);
    CHECK(p.stim_id == src.id);
    CHECK(p.stim_category == src.category);
    CHECK(p.resp.rows() == arch.t);
    CHECK(p.resp.cols() == arch.channels);
    CHECK(p.resp.allFinite());
    seeds.insert(p.seed);
  }
  CHECK(seeds.size() == bg.pairs.size());

  GeneratedSet again = build_generated_set(g, stims, 3, 41);
  for (std::size_t i = 0; i < bg.pairs.size(); ++i)
    CHECK(again.pairs[i].resp == bg.pairs[i].resp);
  GeneratedSet other = build_generated_set(g, stims, 3, 42);
  CHECK((other.pairs[0].resp - bg.pairs[0].resp).norm() > 0.0);

  CHECK_THROWS_AS(build_generated_set(g, stims, 0, 41), std::invalid_argument);
}

TEST_CASE("iat_test accepts matched pairs over violations") {
  Fixture f = fixture();
  ClassifierResult res = train_pair_classifier(f.pos, f.neg, 3, tiny_config(), 11);

  const Real on_matched = iat_test(res.classifier, wrap_generated(f.pos));
  const Real on_violations = iat_test(res.classifier, wrap_generated(f.neg));
  CHECK(on_matched >= 0.0);
  CHECK(on_matched <= 100.0);
  CHECK(on_violations >= 0.0);
  CHECK(on_violations <= 100.0);
  CHECK(on_matched > on_violations + 20.0);

  int manual = 0;
  for (const auto& p : f.pos) manual += res.classifier.classify(p.first, p.second);
  CHECK(on_matched ==
        doctest::Approx(100.0 * manual / static_cast<Real>(f.pos.size())));
}

TEST_CASE("iat_test only scores with a real-pair judge") {
  Fixture f = fixture();
  gan::GanArch arch;
  arch.channels = f.a.channels();
  arch.t = f.a.frames();
  arch.hidden = {8, 12, 16};
  PairClassifier e(arch, 3);

  CHECK_THROWS_AS(iat_test(e, GeneratedSet{}), std::invalid_argument);

  e.set_training_tag("generated-pairs");
  CHECK_THROWS_AS(iat_test(e, wrap_generated(f.pos)), std::logic_error);
}

TEST_CASE("iat_train rewards generator output matching the reference pairing") {
  Fixture f = fixture();
  ClassifierConfig cfg = tiny_config();

  const Real diverse = iat_train(wrap_generated(f.pos), f.neg, f.a, 3, cfg, 13);
  CHECK(diverse >= 0.0);
  CHECK(diverse <= 100.0);
  CHECK(diverse >= 80.0);

  std::vector<FlatPair> collapsed = f.pos;
  for (auto& p : collapsed) p.second = f.pos[0].second;
  const Real degenerate = iat_train(wrap_generated(collapsed), f.neg, f.a, 3, cfg, 13);
  CHECK(degenerate <= diverse);

  CHECK_THROWS_AS(iat_train(wrap_generated(f.pos), f.neg, PairedSet{}, 3, cfg, 13),
                  std::invalid_argument);
}
