#include "iat/datasets.hpp"

#include "iat/rng.hpp"
#include "iat/skeleton.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace iat {
namespace {

// Which side of its rule a clip sits on. Role disambiguates the odd corpus
// where a category appears as stimulus in one rule and response in another.
bool is_stimulus_side(const ActionClip& clip, const InteractionRuleSet& rules) {
  bool as_stim = false, as_resp = false;
  for (const auto& [s, r] : rules.rules) {
    if (s == clip.category) as_stim = true;
    if (r == clip.category) as_resp = true;
  }
  if (!as_stim && !as_resp)
    throw std::invalid_argument("build_sets: category '" + clip.category +
                                "' (clip '" + clip.id + "') not covered by any rule");
  if (as_stim && as_resp) return clip.role == Role::stimulative;
  return as_stim;
}

}  // namespace

FlatAction flatten_clip(const ActionClip& clip, const SkeletonTopology& topology,
                        int t_out) {
  const ActionClip* src = &clip;
  ActionClip resampled;
  if (t_out > 0 && clip.frame_count() != t_out) {
    resampled = resample_temporal(clip, t_out);
    src = &resampled;
  }
  return to_flat(joints_to_limbs(*src, topology));
}

BuiltSets build_sets(const std::vector<ActionClip>& clips,
                     const SkeletonTopology& topology,
                     const InteractionRuleSet& rules, Real split,
                     std::uint64_t seed, int t_out) {
  rules.validate();
  if (clips.empty()) throw std::invalid_argument("build_sets: no clips");
  if (!(split > 0 && split < 1))
    throw std::invalid_argument("build_sets: split must lie in (0,1)");
  const int t_target = t_out > 0 ? t_out : clips.front().frame_count();

  // stratified split per category, order-independent of the input listing
  std::map<std::string, std::vector<int>> by_category;
  for (int i = 0; i < static_cast<int>(clips.size()); ++i) {
    if (clips[i].category.empty())
      throw std::invalid_argument("build_sets: clip '" + clips[i].id + "' is unlabeled");
    by_category[clips[i].category].push_back(i);
  }

  Rng rng(seed);
  Rng split_rng = rng.fork(1);
  Rng match_rng = rng.fork(2);

  std::vector<int> train, held;
  for (auto& [cat, members] : by_category) {
    split_rng.shuffle(members);
    const int n_train = static_cast<int>(split * static_cast<Real>(members.size()) + 0.5);
    for (int i = 0; i < static_cast<int>(members.size()); ++i)
      (i < n_train ? train : held).push_back(members[i]);
  }

  // training clips bucketed per rule side
  std::map<std::string, std::vector<int>> stim_pool, resp_pool;
  for (int idx : train) {
    const ActionClip& clip = clips[idx];
    (is_stimulus_side(clip, rules) ? stim_pool : resp_pool)[clip.category].push_back(idx);
  }

  BuiltSets out;
  for (const auto& [stim_cat, resp_cat] : rules.rules) {
    auto si = stim_pool.find(stim_cat);
    auto ri = resp_pool.find(resp_cat);
    if (si == stim_pool.end() || si->second.empty() || ri == resp_pool.end() ||
        ri->second.empty())
      throw std::runtime_error("build_sets: rule '" + stim_cat + "' -> '" + resp_cat +
                               "' has no " +
                               (si == stim_pool.end() || si->second.empty() ? "stimuli"
                                                                            : "responses") +
                               " in the training split");
    std::vector<int> stims = si->second;
    std::vector<int> resps = ri->second;
    match_rng.shuffle(stims);
    match_rng.shuffle(resps);
    const int n = static_cast<int>(std::min(stims.size(), resps.size()));
    for (int i = 0; i < n; ++i) {
      ActionPair pair;
      pair.stim = flatten_clip(clips[stims[i]], topology, t_target);
      pair.resp = flatten_clip(clips[resps[i]], topology, t_target);
      pair.provenance = Provenance::original;
      pair.stim_category = stim_cat;
      pair.resp_category = resp_cat;
      out.a.pairs.push_back(std::move(pair));
    }
  }
  out.a.validate();

  for (int idx : held) {
    const ActionClip& clip = clips[idx];
    EvalInstance inst;
    inst.action = flatten_clip(clip, topology, t_target);
    inst.id = clip.id;
    inst.category = clip.category;
    inst.role = is_stimulus_side(clip, rules) ? Role::stimulative : Role::responsive;
    out.b.instances.push_back(std::move(inst));
  }
  return out;
}

void derive_pos_neg(EvalSet& b, const InteractionRuleSet& rules, int max_per_class,
                    std::uint64_t seed) {
  if (max_per_class < 1)
    throw std::invalid_argument("derive_pos_neg: max_per_class must be >= 1");
  std::vector<std::pair<int, int>> pos, neg;
  for (int i = 0; i < b.size(); ++i) {
    if (b.instances[i].role != Role::stimulative) continue;
    for (int j = 0; j < b.size(); ++j) {
      if (b.instances[j].role != Role::responsive) continue;
      (rules.is_rule(b.instances[i].category, b.instances[j].category) ? pos : neg)
          .emplace_back(i, j);
    }
  }
  if (pos.empty()) throw std::runtime_error("derive_pos_neg: no rule-conformant pairs");
  if (neg.empty()) throw std::runtime_error("derive_pos_neg: no rule-violating pairs");

  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  const int cap = std::min({static_cast<int>(pos.size()), static_cast<int>(neg.size()),
                            max_per_class});
  pos.resize(cap);
  neg.resize(cap);
  b.pos_pairs = std::move(pos);
  b.neg_pairs = std::move(neg);
}

}  // namespace iat
