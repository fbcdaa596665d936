#include "iat/manifest.hpp"

#include "iat/synth.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

using namespace iat;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("/tmp/iat_manifest_test_") + name;
}

Manifest synthetic_manifest() {
  SynthSpec spec;
  spec.k = 5;
  spec.per_class = 10;
  spec.t = 16;
  spec.seed = 7;
  SynthCorpus corpus = generate_synthetic(spec);
  Manifest m;
  m.name = "synthetic";
  m.topology = spec.topology;
  m.clips = corpus.clips;
  return m;
}

}  // namespace

TEST_CASE("manifest round trip is bit-identical") {
  Manifest m = synthetic_manifest();
  REQUIRE(m.clips.size() == 100);
  const std::string path = temp_path("roundtrip.json");
  save_manifest(m, path);
  Manifest back = load_manifest(path);
  CHECK(back.name == m.name);
  CHECK(back.topology == m.topology);
  REQUIRE(back.clips.size() == m.clips.size());
  for (size_t i = 0; i < m.clips.size(); ++i) {
    CHECK(back.clips[i].id == m.clips[i].id);
    CHECK(back.clips[i].category == m.clips[i].category);
    CHECK(back.clips[i].role == m.clips[i].role);
    CHECK(back.clips[i].frames == m.clips[i].frames);  // exact, no tolerance
  }
  std::remove(path.c_str());
}

TEST_CASE("nan coordinate names the clip") {
  const std::string path = temp_path("nan.json");
  std::ofstream out(path);
  out << R"({"name":"x","joint_count":2,"parent":[-1,0],"clips":[)"
      << R"({"id":"bad_clip","role":"stimulative","frames":[[[0,0,0],[0,0,1]],)"
      << R"([[0,0,null],[0,0,1]]]}]})";
  out.close();
  CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("bad_clip"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("joint count mismatch is a schema error") {
  const std::string path = temp_path("mismatch.json");
  std::ofstream out(path);
  out << R"({"name":"x","joint_count":3,"parent":[-1,0,1],"clips":[)"
      << R"({"id":"short_clip","role":"responsive","frames":[[[0,0,0],[0,0,1]],)"
      << R"([[0,0,0],[0,0,1]]]}]})";
  out.close();
  CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("short_clip"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("unparseable manifest names the file") {
  const std::string path = temp_path("garbage.json");
  std::ofstream out(path);
  out << "{ not json";
  out.close();
  CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("garbage"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("missing file raises") {
  CHECK_THROWS_AS(load_manifest("/tmp/does_not_exist_iat.json"), std::runtime_error);
}

TEST_CASE("rules round trip") {
  InteractionRuleSet rules;
  rules.rules = {{"wave", "wave_back"}, {"punch", "dodge"}};
  const std::string path = temp_path("rules.json");
  save_rules(rules, path);
  InteractionRuleSet back = load_rules(path);
  CHECK(back.rules == rules.rules);
  std::remove(path.c_str());
}

TEST_CASE("duplicate stimulus category rejected on load") {
  const std::string path = temp_path("dup_rules.json");
  std::ofstream out(path);
  out << R"({"rules":[{"stimulus":"a","response":"b"},{"stimulus":"a","response":"c"}]})";
  out.close();
  CHECK_THROWS(load_rules(path));
  std::remove(path.c_str());
}
