#include "iat/manifest.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace iat {

using nlohmann::json;

namespace {

json frames_to_json(const Mat& frames, int joints) {
  json out = json::array();
  for (int t = 0; t < frames.rows(); ++t) {
    json frame = json::array();
    for (int j = 0; j < joints; ++j)
      frame.push_back({frames(t, 3 * j), frames(t, 3 * j + 1), frames(t, 3 * j + 2)});
    out.push_back(std::move(frame));
  }
  return out;
}

Mat frames_from_json(const json& jframes, int joints, const std::string& clip_id) {
  if (!jframes.is_array() || jframes.empty())
    throw std::runtime_error("manifest: clip '" + clip_id + "': frames must be a nonempty array");
  const int t_len = static_cast<int>(jframes.size());
  Mat frames(t_len, 3 * joints);
  for (int t = 0; t < t_len; ++t) {
    const auto& frame = jframes[t];
    if (!frame.is_array() || static_cast<int>(frame.size()) != joints)
      throw std::runtime_error("manifest: clip '" + clip_id + "': frame " + std::to_string(t) +
                               " has wrong joint count (schema expects " +
                               std::to_string(joints) + ")");
    for (int j = 0; j < joints; ++j) {
      const auto& p = frame[j];
      if (!p.is_array() || p.size() != 3)
        throw std::runtime_error("manifest: clip '" + clip_id + "': joint " + std::to_string(j) +
                                 " at frame " + std::to_string(t) + " is not an [x,y,z] triple");
      for (int a = 0; a < 3; ++a) {
        if (!p[a].is_number())
          throw std::runtime_error("manifest: clip '" + clip_id + "': non-numeric coordinate at frame " +
                                   std::to_string(t));
        frames(t, 3 * j + a) = p[a].get<Real>();
      }
    }
  }
  return frames;
}

}  // namespace

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest: cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error("manifest: parse failure in '" + path + "': " + e.what());
  }

  Manifest m;
  m.name = doc.value("name", "");
  m.topology.joint_count = doc.at("joint_count").get<int>();
  m.topology.parent = doc.at("parent").get<std::vector<int>>();
  m.topology.validate();
  m.fps = doc.value("fps", 0.0);

  for (const auto& jc : doc.at("clips")) {
    ActionClip clip;
    clip.id = jc.at("id").get<std::string>();
    clip.category = jc.value("category", "");
    clip.subject = jc.value("subject", "");
    const std::string role = jc.value("role", "stimulative");
    if (role == "stimulative") {
      clip.role = Role::stimulative;
    } else if (role == "responsive") {
      clip.role = Role::responsive;
    } else {
      throw std::runtime_error("manifest: clip '" + clip.id + "': unknown role '" + role + "'");
    }
    clip.frames = frames_from_json(jc.at("frames"), m.topology.joint_count, clip.id);
    if (!clip.frames.allFinite())
      throw std::runtime_error("manifest: clip '" + clip.id + "': non-finite coordinate");
    clip.validate();
    m.clips.push_back(std::move(clip));
  }
  return m;
}

void save_manifest(const Manifest& manifest, const std::string& path) {
  json doc;
  doc["name"] = manifest.name;
  doc["joint_count"] = manifest.topology.joint_count;
  doc["parent"] = manifest.topology.parent;
  if (manifest.fps > 0) doc["fps"] = manifest.fps;
  doc["clips"] = json::array();
  for (const auto& clip : manifest.clips) {
    json jc;
    jc["id"] = clip.id;
    if (!clip.category.empty()) jc["category"] = clip.category;
    if (!clip.subject.empty()) jc["subject"] = clip.subject;
    jc["role"] = to_string(clip.role);
    jc["frames"] = frames_to_json(clip.frames, clip.joint_count());
    doc["clips"].push_back(std::move(jc));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("manifest: cannot write '" + path + "'");
  out << doc.dump(1) << "\n";
}

InteractionRuleSet load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("rules: cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error("rules: parse failure in '" + path + "': " + e.what());
  }
  InteractionRuleSet rules;
  for (const auto& jr : doc.at("rules"))
    rules.rules.emplace_back(jr.at("stimulus").get<std::string>(),
                             jr.at("response").get<std::string>());
  rules.validate();
  return rules;
}

void save_rules(const InteractionRuleSet& rules, const std::string& path) {
  json doc;
  doc["rules"] = json::array();
  for (const auto& [s, r] : rules.rules) doc["rules"].push_back({{"stimulus", s}, {"response", r}});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("rules: cannot write '" + path + "'");
  out << doc.dump(1) << "\n";
}

}  // namespace iat
