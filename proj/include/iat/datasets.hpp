#pragma once

#include "iat/types.hpp"

#include <cstdint>
#include <vector>

namespace iat {

struct BuiltSets {
  PairedSet a;  // random within-rule matching of the training split
  EvalSet b;    // held-out labeled instances; pos/neg pairs filled separately
};

// Partition clips per category by `split` (training fraction), then pair the
// training clips uniformly at random within each rule, each clip used at most
// once. Held-out clips become EvalSet instances. Clips are converted to flat
// limb-vector sequences; t_out > 0 resamples everything to that length, 0
// keeps the first clip's length.
//
// Throws when a clip's category is missing from the rules, when a rule ends
// up with zero stimuli or zero responses in the training split, or when clips
// disagree on joint count.
BuiltSets build_sets(const std::vector<ActionClip>& clips,
                     const SkeletonTopology& topology,
                     const InteractionRuleSet& rules, Real split,
                     std::uint64_t seed, int t_out = 0);

// Fill b.pos_pairs / b.neg_pairs by sampling the stim x resp cross product:
// rule-conformant pairs become positives, the rest negatives, both capped at
// min(max_per_class, candidates) and balanced to the smaller side.
// Throws when either candidate set is empty.
void derive_pos_neg(EvalSet& b, const InteractionRuleSet& rules,
                    int max_per_class, std::uint64_t seed);

// Flat limb-vector view of one clip, resampled to t_out frames when t_out > 0.
FlatAction flatten_clip(const ActionClip& clip, const SkeletonTopology& topology,
                        int t_out = 0);

}  // namespace iat
