#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace iat {

using Real = double;
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Vec3 = Eigen::Matrix<Real, 3, 1>;

// A skeleton action sequence flattened to one matrix: row t holds the pose at
// frame t as consecutive (x, y, z) triples, one triple per limb vector.
using FlatAction = Mat;

enum class Role { stimulative, responsive };

inline const char* to_string(Role r) {
  return r == Role::stimulative ? "stimulative" : "responsive";
}

// Joint hierarchy: parent[j] is the parent joint index, -1 for the root.
// Limbs are the parent->child edges, ordered by ascending child joint.
struct SkeletonTopology {
  int joint_count = 0;
  std::vector<int> parent;

  int limb_count() const { return joint_count - 1; }

  int root() const {
    for (int j = 0; j < joint_count; ++j)
      if (parent[j] < 0) return j;
    throw std::logic_error("topology has no root");
  }

  // child joint of each limb, ascending
  std::vector<int> limb_children() const {
    std::vector<int> children;
    children.reserve(limb_count());
    for (int j = 0; j < joint_count; ++j)
      if (parent[j] >= 0) children.push_back(j);
    return children;
  }

  void validate() const {
    if (joint_count < 2) throw std::invalid_argument("topology needs at least 2 joints");
    if (static_cast<int>(parent.size()) != joint_count)
      throw std::invalid_argument("topology parent array size != joint_count");
    int roots = 0;
    for (int j = 0; j < joint_count; ++j) {
      if (parent[j] == -1) {
        ++roots;
      } else if (parent[j] < 0 || parent[j] >= joint_count) {
        throw std::invalid_argument("topology parent index out of range at joint " +
                                    std::to_string(j));
      }
    }
    if (roots != 1) throw std::invalid_argument("topology must have exactly one root");
    // walking up from every joint must reach the root without revisiting
    for (int j = 0; j < joint_count; ++j) {
      int hops = 0;
      for (int p = j; parent[p] >= 0; p = parent[p]) {
        if (++hops > joint_count) throw std::invalid_argument("topology contains a cycle");
      }
    }
  }

  bool operator==(const SkeletonTopology& other) const {
    return joint_count == other.joint_count && parent == other.parent;
  }
};

// One skeleton action sequence in joint coordinates. frames is T x 3J with
// row t = [x0 y0 z0 x1 y1 z1 ...]; coordinates are in arbitrary spatial units.
struct ActionClip {
  std::string id;
  std::string category;  // empty when unlabeled
  std::string subject;   // empty when unknown
  Role role = Role::stimulative;
  Mat frames;

  int frame_count() const { return static_cast<int>(frames.rows()); }
  int joint_count() const { return static_cast<int>(frames.cols()) / 3; }

  Vec3 joint(int t, int j) const { return frames.block<1, 3>(t, 3 * j).transpose(); }
  void set_joint(int t, int j, const Vec3& p) { frames.block<1, 3>(t, 3 * j) = p.transpose(); }

  void validate() const {
    if (frame_count() < 2) throw std::invalid_argument("clip '" + id + "': needs T >= 2");
    if (frames.cols() % 3 != 0)
      throw std::invalid_argument("clip '" + id + "': frame width not a multiple of 3");
    if (!frames.allFinite())
      throw std::invalid_argument("clip '" + id + "': non-finite coordinate");
  }
};

// Unit limb vectors per frame (T x 3L) plus per-limb mean lengths recorded at
// conversion so a joint-space clip can be rebuilt.
struct LimbSequence {
  Mat vectors;
  Vec limb_lengths;
  SkeletonTopology topology;

  int frame_count() const { return static_cast<int>(vectors.rows()); }
  int limb_count() const { return static_cast<int>(vectors.cols()) / 3; }
};

// Stimulus category -> response category pairs; each category may appear in
// at most one rule on its side.
struct InteractionRuleSet {
  std::vector<std::pair<std::string, std::string>> rules;

  int rule_count() const { return static_cast<int>(rules.size()); }

  bool is_rule(const std::string& stim_cat, const std::string& resp_cat) const {
    for (const auto& [s, r] : rules)
      if (s == stim_cat && r == resp_cat) return true;
    return false;
  }

  // response category mandated for a stimulus category, or empty
  std::string response_for(const std::string& stim_cat) const {
    for (const auto& [s, r] : rules)
      if (s == stim_cat) return r;
    return {};
  }

  void validate() const {
    if (rules.empty()) throw std::invalid_argument("rule set is empty");
    for (size_t i = 0; i < rules.size(); ++i)
      for (size_t j = i + 1; j < rules.size(); ++j) {
        if (rules[i].first == rules[j].first)
          throw std::invalid_argument("stimulus category '" + rules[i].first +
                                      "' appears in more than one rule");
        if (rules[i].second == rules[j].second)
          throw std::invalid_argument("response category '" + rules[i].second +
                                      "' appears in more than one rule");
      }
  }
};

enum class Provenance { original, augmented };

// A (stimulation, response) training pair. Categories are diagnostic metadata
// carried through from labeled corpora; the learning path never reads them.
struct ActionPair {
  FlatAction stim;
  FlatAction resp;
  Provenance provenance = Provenance::original;
  std::string stim_category;
  std::string resp_category;
};

struct PairedSet {
  std::vector<ActionPair> pairs;

  int size() const { return static_cast<int>(pairs.size()); }
  bool labeled() const {
    if (pairs.empty()) return false;
    for (const auto& p : pairs)
      if (p.stim_category.empty() || p.resp_category.empty()) return false;
    return true;
  }

  int frames() const { return pairs.empty() ? 0 : static_cast<int>(pairs[0].stim.rows()); }
  int channels() const { return pairs.empty() ? 0 : static_cast<int>(pairs[0].stim.cols()); }

  void validate() const {
    if (pairs.empty()) return;
    const auto t = pairs[0].stim.rows();
    const auto c = pairs[0].stim.cols();
    for (size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].stim.rows() != t || pairs[i].stim.cols() != c ||
          pairs[i].resp.rows() != t || pairs[i].resp.cols() != c)
        throw std::invalid_argument("paired set: inconsistent shape at pair " +
                                    std::to_string(i));
    }
  }
};

// A labeled individual action reserved for evaluation.
struct EvalInstance {
  FlatAction action;
  std::string id;
  std::string category;
  Role role = Role::stimulative;
};

// Set B plus the derived positive/negative pair index lists. Pairs reference
// instances so label audits stay cheap.
struct EvalSet {
  std::vector<EvalInstance> instances;
  std::vector<std::pair<int, int>> pos_pairs;  // (stim index, resp index), rule-conformant
  std::vector<std::pair<int, int>> neg_pairs;  // rule-violating

  int size() const { return static_cast<int>(instances.size()); }

  std::vector<std::pair<FlatAction, FlatAction>> materialize(
      const std::vector<std::pair<int, int>>& index_pairs) const {
    std::vector<std::pair<FlatAction, FlatAction>> out;
    out.reserve(index_pairs.size());
    for (const auto& [si, ri] : index_pairs)
      out.emplace_back(instances[si].action, instances[ri].action);
    return out;
  }
};

}  // namespace iat
