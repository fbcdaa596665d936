#pragma once

#include "iat/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace iat {

// Parameterized synthetic corpus: K interaction rules over 2K categories
// (K stimulative, K responsive), per_class clips per category. Motions are
// sinusoidal joint-angle trajectories; each category owns a distinct limb
// activation pattern plus (amplitude, frequency) drawn from separated grids,
// and clips add per-clip nuisance jitter on top.
struct SynthSpec {
  int k = 5;              // rule count
  int per_class = 20;     // clips per category
  int t = 32;             // frames per clip
  SkeletonTopology topology;  // default: 9-joint upper body
  Real amplitude_jitter = 0.1;  // multiplicative, +-10%
  Real speed_jitter = 0.1;      // multiplicative on frequency
  Real phase_jitter = 0.25;     // additive radians, whole-clip time shift
  std::uint64_t seed = 7;

  SynthSpec();

  void validate() const {
    if (k < 2) throw std::invalid_argument("synth: k must be >= 2");
    if (per_class < 2) throw std::invalid_argument("synth: per_class must be >= 2");
    if (t < 2) throw std::invalid_argument("synth: t must be >= 2");
    if (amplitude_jitter < 0 || speed_jitter < 0 || phase_jitter < 0)
      throw std::invalid_argument("synth: jitters must be nonnegative");
  }
};

SkeletonTopology default_upper_body_topology();
Vec default_upper_body_limb_lengths();

// Ground-truth templates kept for classification; one zero-jitter limb-vector
// sequence (T x 3L) per category, in category order.
struct SynthOracle {
  SkeletonTopology topology;
  int t = 0;
  std::vector<std::string> categories;
  std::vector<Mat> templates;
};

struct SynthCorpus {
  std::vector<ActionClip> clips;
  InteractionRuleSet rules;
  SynthOracle oracle;
};

// Deterministic: the same spec (seed included) reproduces the corpus
// bit-identically.
SynthCorpus generate_synthetic(const SynthSpec& spec);

// Nearest-template category by mean squared limb-vector distance; ties break
// toward the lowest category index. The clip is resampled to the oracle's T
// when lengths differ.
std::string oracle_classify(const ActionClip& clip, const SynthOracle& oracle);

// Distance table used by oracle_classify, exposed for margin diagnostics.
Vec oracle_distances(const ActionClip& clip, const SynthOracle& oracle);

}  // namespace iat
