#include "iat/datasets.hpp"

#include "iat/synth.hpp"

#include <doctest.h>

#include <set>

using namespace iat;

namespace {

SynthCorpus paper_sized_corpus(std::uint64_t seed = 7) {
  SynthSpec spec;
  spec.k = 5;
  spec.per_class = 32;
  spec.t = 16;
  spec.seed = seed;
  return generate_synthetic(spec);
}

}  // namespace

TEST_CASE("balanced corpus yields the expected sizes") {
  SynthCorpus corpus = paper_sized_corpus();
  SynthSpec spec;  // for topology
  BuiltSets sets = build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, 17);
  // 10 categories x 16 training clips -> 5 rules x 16 pairs
  CHECK(sets.a.size() == 80);
  CHECK(sets.b.size() == 160);
  CHECK(sets.a.labeled());
  for (const auto& pair : sets.a.pairs) {
    CHECK(corpus.rules.is_rule(pair.stim_category, pair.resp_category));
    CHECK(pair.provenance == Provenance::original);
  }
  CHECK(sets.a.frames() == 16);
  CHECK(sets.a.channels() == 24);
}

TEST_CASE("training and held-out clips never overlap") {
  SynthSpec spec;
  spec.k = 2;
  spec.per_class = 6;
  spec.t = 8;
  spec.seed = 41;
  SynthCorpus corpus = generate_synthetic(spec);
  BuiltSets sets = build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, 17);
  // all jittered clips are distinct, so frame-level equality identifies a clip
  for (const auto& inst : sets.b.instances)
    for (const auto& pair : sets.a.pairs) {
      CHECK(inst.action != pair.stim);
      CHECK(inst.action != pair.resp);
    }
}

TEST_CASE("same seed reproduces the pairing") {
  SynthCorpus corpus = paper_sized_corpus();
  SynthSpec spec;
  BuiltSets x = build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, 99);
  BuiltSets y = build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, 99);
  REQUIRE(x.a.size() == y.a.size());
  for (int i = 0; i < x.a.size(); ++i) {
    CHECK(x.a.pairs[i].stim == y.a.pairs[i].stim);
    CHECK(x.a.pairs[i].resp == y.a.pairs[i].resp);
  }
  BuiltSets z = build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, 100);
  bool any_differ = false;
  for (int i = 0; i < x.a.size() && !any_differ; ++i)
    any_differ = x.a.pairs[i].stim != z.a.pairs[i].stim;
  CHECK(any_differ);
}

TEST_CASE("one clip per side forces the single pair") {
  SynthSpec spec;
  spec.k = 2;
  spec.per_class = 2;
  spec.t = 8;
  spec.seed = 5;
  SynthCorpus corpus = generate_synthetic(spec);
  // split 0.5 of 2 clips -> 1 train + 1 held per category
  BuiltSets sets = build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, 1);
  CHECK(sets.a.size() == 2);  // one pair per rule
  CHECK(sets.b.size() == 4);
}

TEST_CASE("category outside the rules is rejected") {
  SynthSpec spec;
  spec.k = 2;
  spec.per_class = 2;
  spec.t = 8;
  spec.seed = 5;
  SynthCorpus corpus = generate_synthetic(spec);
  corpus.clips[0].category = "mystery";
  CHECK_THROWS_WITH_AS(
      build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, 1),
      doctest::Contains("mystery"), std::invalid_argument);
}

TEST_CASE("rule with no clips on one side is unsatisfiable") {
  SynthSpec spec;
  spec.k = 2;
  spec.per_class = 4;
  spec.t = 8;
  spec.seed = 5;
  SynthCorpus corpus = generate_synthetic(spec);
  InteractionRuleSet rules = corpus.rules;
  rules.rules.emplace_back("stim_xx", "resp_xx");  // no clips carry these
  // clips all covered by the first two rules, so pre holds; the ghost rule
  // still cannot be satisfied
  CHECK_THROWS_WITH_AS(build_sets(corpus.clips, spec.topology, rules, 0.5, 1),
                       doctest::Contains("stim_xx"), std::runtime_error);
}

TEST_CASE("bad split fractions rejected") {
  SynthCorpus corpus = paper_sized_corpus();
  SynthSpec spec;
  CHECK_THROWS_AS(build_sets(corpus.clips, spec.topology, corpus.rules, 0.0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_sets(corpus.clips, spec.topology, corpus.rules, 1.0, 1),
                  std::invalid_argument);
}

TEST_CASE("pos and neg pairs audit clean and balanced") {
  SynthSpec spec;
  spec.k = 2;
  spec.per_class = 4;
  spec.t = 8;
  spec.seed = 13;
  SynthCorpus corpus = generate_synthetic(spec);
  BuiltSets sets = build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, 17);
  derive_pos_neg(sets.b, corpus.rules, 100, 23);
  // 2 held stims and resps per category: cross product 4x4 = 16, half conformant
  CHECK(sets.b.pos_pairs.size() == 8);
  CHECK(sets.b.neg_pairs.size() == 8);
  for (const auto& [si, ri] : sets.b.pos_pairs) {
    CHECK(sets.b.instances[si].role == Role::stimulative);
    CHECK(sets.b.instances[ri].role == Role::responsive);
    CHECK(corpus.rules.is_rule(sets.b.instances[si].category,
                               sets.b.instances[ri].category));
  }
  for (const auto& [si, ri] : sets.b.neg_pairs)
    CHECK_FALSE(corpus.rules.is_rule(sets.b.instances[si].category,
                                     sets.b.instances[ri].category));
}

TEST_CASE("caps balance both sides") {
  SynthCorpus corpus = paper_sized_corpus();
  SynthSpec spec;
  BuiltSets sets = build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, 17);
  derive_pos_neg(sets.b, corpus.rules, 50, 23);
  CHECK(sets.b.pos_pairs.size() == 50);
  CHECK(sets.b.neg_pairs.size() == 50);
}

TEST_CASE("single all-covering rule leaves no negatives") {
  SynthSpec spec;
  spec.k = 2;
  spec.per_class = 4;
  spec.t = 8;
  spec.seed = 13;
  SynthCorpus corpus = generate_synthetic(spec);
  // keep only rule 0's categories
  std::vector<ActionClip> filtered;
  for (const auto& clip : corpus.clips)
    if (clip.category == "stim_00" || clip.category == "resp_00")
      filtered.push_back(clip);
  InteractionRuleSet one;
  one.rules = {{"stim_00", "resp_00"}};
  BuiltSets sets = build_sets(filtered, spec.topology, one, 0.5, 17);
  CHECK_THROWS_WITH_AS(derive_pos_neg(sets.b, one, 100, 23),
                       doctest::Contains("violating"), std::runtime_error);
}

TEST_CASE("materialize returns the referenced actions") {
  SynthSpec spec;
  spec.k = 2;
  spec.per_class = 4;
  spec.t = 8;
  spec.seed = 13;
  SynthCorpus corpus = generate_synthetic(spec);
  BuiltSets sets = build_sets(corpus.clips, spec.topology, corpus.rules, 0.5, 17);
  derive_pos_neg(sets.b, corpus.rules, 4, 23);
  auto pos = sets.b.materialize(sets.b.pos_pairs);
  REQUIRE(pos.size() == sets.b.pos_pairs.size());
  CHECK(pos[0].first == sets.b.instances[sets.b.pos_pairs[0].first].action);
  CHECK(pos[0].second == sets.b.instances[sets.b.pos_pairs[0].second].action);
}
