#include "iat/synth.hpp"

#include "iat/rng.hpp"
#include "iat/skeleton.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace iat {
namespace {

// Rodrigues rotation of v about unit axis by angle.
Vec3 rotate(const Vec3& v, const Vec3& axis, Real angle) {
  const Real c = std::cos(angle);
  const Real s = std::sin(angle);
  return v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1 - c));
}

struct LimbPose {
  Vec3 base;  // rest direction, unit
  Vec3 axis;  // swing axis, unit, perpendicular to base
};

// Rest pose for the default 9-joint upper body. Limb l ends at joint l+1.
std::vector<LimbPose> upper_body_pose() {
  const Vec3 up(0, 0, 1), fwd(0, 1, 0), left(1, 0, 0), right(-1, 0, 0);
  return {
      {up, left},     // torso -> neck
      {up, left},     // neck -> head
      {left, fwd},    // neck -> left shoulder
      {left, fwd},    // left upper arm
      {left, up},     // left forearm
      {right, fwd},   // neck -> right shoulder
      {right, fwd},   // right upper arm
      {right, up},    // right forearm
  };
}

// Generic fallback for non-default topologies: alternate up/side limbs.
std::vector<LimbPose> generic_pose(int limb_count) {
  std::vector<LimbPose> pose;
  pose.reserve(limb_count);
  const Vec3 dirs[4] = {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}};
  const Vec3 axes[4] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, 1}};
  for (int l = 0; l < limb_count; ++l) pose.push_back({dirs[l % 4], axes[l % 4]});
  return pose;
}

// Extended Hamming (8,4) codeword for data nibble d: seven code bits plus an
// overall parity bit, minimum pairwise distance 4.
std::uint32_t hamming8(std::uint32_t d) {
  const int d1 = (d >> 3) & 1, d2 = (d >> 2) & 1, d3 = (d >> 1) & 1, d4 = d & 1;
  const int p1 = d1 ^ d2 ^ d4;
  const int p2 = d1 ^ d3 ^ d4;
  const int p3 = d2 ^ d3 ^ d4;
  std::uint32_t w = 0;
  const int bits[7] = {p1, p2, d1, p3, d2, d3, d4};
  int parity = 0;
  for (int i = 0; i < 7; ++i) {
    w |= static_cast<std::uint32_t>(bits[i]) << i;
    parity ^= bits[i];
  }
  w |= static_cast<std::uint32_t>(parity) << 7;
  return w;
}

int hamming_distance(std::uint32_t a, std::uint32_t b) {
  return std::popcount(a ^ b);
}

// One activation mask per category, pairwise well separated. For 8 limbs and
// up to 14 categories these are the nonzero extended Hamming codewords
// (distance >= 4, full word excluded: it is reserved for the stimulative
// role); otherwise masks are grown greedily under a distance floor.
std::vector<std::vector<int>> category_masks(int count, int limb_count, Rng& rng) {
  std::vector<std::uint32_t> words;
  if (limb_count == 8 && count <= 14) {
    for (std::uint32_t d = 1; d < 15; ++d) words.push_back(hamming8(d));
    rng.shuffle(words);
    words.resize(count);
  } else {
    const int floor_dist = std::max(2, limb_count / 3);
    const std::uint32_t space = limb_count >= 31 ? 0x7fffffffu : ((1u << limb_count) - 1);
    int attempts = 0;
    while (static_cast<int>(words.size()) < count) {
      const std::uint32_t w = 1 + rng.uniform_int(static_cast<int>(space));
      int best = limb_count + 1;
      for (std::uint32_t prev : words) best = std::min(best, hamming_distance(w, prev));
      if (best >= floor_dist || ++attempts > 20000) {
        if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);
      }
    }
  }
  std::vector<std::vector<int>> masks;
  masks.reserve(count);
  for (std::uint32_t w : words) {
    std::vector<int> m(limb_count);
    for (int l = 0; l < limb_count; ++l) m[l] = (w >> l) & 1;
    masks.push_back(std::move(m));
  }
  return masks;
}

struct CategoryTemplate {
  std::vector<int> mask;
  Real amplitude = 0;
  std::vector<Real> frequency;  // per limb
  std::vector<Real> limb_phase;
};

// Stimulative clips carry a whole-clip time offset of up to this fraction of
// the plain phase jitter (in clip-fraction units). Limbs running at different
// speeds translate the offset into different phase shifts, so the offset
// dominates raw within-category spread while a clip's per-limb frequency
// code keeps it closest to its own template at every offset.
constexpr Real kStimTimeScale = 0.6;

// Stimulative clips see speed jitter at reduced strength: accumulated speed
// drift eats the same per-clip template margin the time offset does, and the
// offset is the nuisance that carries the within-category spread.
constexpr Real kStimSpeedScale = 0.5;

// The two speeds stimulative limbs can run at; each category is a distinct
// slow/fast assignment across limbs.
constexpr Real kStimSlow = 0.6;
constexpr Real kStimFast = 1.2;

// Mean squared limb-vector distance, the oracle's template metric.
Real template_distance(const Mat& a, const Mat& b) {
  return (a - b).squaredNorm() / static_cast<Real>(a.size());
}

// Every responsive template must keep this much rendered distance from every
// stimulative template (under any time offset the nuisance can apply to the
// latter) and from the other responsive templates, so nearest-template
// classification never crosses roles.
constexpr Real kTemplateFloor = 0.065;

// Limb-vector sequence (T x 3L) for a template under the given jitter draws.
// time_offset is in clip-fraction units and shifts each limb by a phase
// proportional to that limb's frequency, i.e. a genuine shift of the clock.
Mat render_limbs(const CategoryTemplate& cat, const std::vector<LimbPose>& pose,
                 int t_frames, Real amp_scale, Real speed_scale, Real phase_shift,
                 Real time_offset = 0) {
  const int limb_count = static_cast<int>(pose.size());
  Mat out(t_frames, 3 * limb_count);
  constexpr Real two_pi = 2 * std::numbers::pi_v<Real>;
  for (int t = 0; t < t_frames; ++t) {
    const Real u = static_cast<Real>(t) / static_cast<Real>(t_frames);
    for (int l = 0; l < limb_count; ++l) {
      const Real theta =
          cat.mask[l] * cat.amplitude * amp_scale *
          std::sin(two_pi * cat.frequency[l] * speed_scale * (u + time_offset) +
                   cat.limb_phase[l] + phase_shift);
      const Vec3 dir = rotate(pose[l].base, pose[l].axis, theta);
      out.block<1, 3>(t, 3 * l) = dir.transpose();
    }
  }
  return out;
}

ActionClip limbs_to_clip(const Mat& limbs, const SkeletonTopology& topology,
                         const Vec& lengths, std::string id, std::string category,
                         Role role) {
  LimbSequence seq;
  seq.vectors = limbs;
  seq.limb_lengths = lengths;
  seq.topology = topology;
  Mat root = Mat::Zero(limbs.rows(), 3);
  ActionClip clip = limbs_to_joints(seq, lengths, root);
  clip.id = std::move(id);
  clip.category = std::move(category);
  clip.role = role;
  return clip;
}

std::string pad2(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

}  // namespace

SkeletonTopology default_upper_body_topology() {
  SkeletonTopology topo;
  topo.joint_count = 9;
  topo.parent = {-1, 0, 1, 1, 3, 4, 1, 6, 7};
  return topo;
}

Vec default_upper_body_limb_lengths() {
  Vec lengths(8);
  lengths << 1.0, 0.5, 0.6, 0.9, 0.8, 0.6, 0.9, 0.8;
  return lengths;
}

SynthSpec::SynthSpec() : topology(default_upper_body_topology()) {}

SynthCorpus generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  spec.topology.validate();
  const int limb_count = spec.topology.limb_count();
  const std::vector<LimbPose> pose =
      spec.topology.parent == default_upper_body_topology().parent
          ? upper_body_pose()
          : generic_pose(limb_count);
  const Vec lengths = spec.topology.parent == default_upper_body_topology().parent
                          ? default_upper_body_limb_lengths()
                          : Vec::Ones(limb_count);

  Rng root(spec.seed);
  Rng mask_rng = root.fork(1);
  Rng param_rng = root.fork(2);
  Rng jitter_rng = root.fork(3);

  const int cat_count = 2 * spec.k;

  // Responsive categories: distinct activation masks on separated
  // (amplitude, frequency) grids, each with its own phase pattern. These form
  // crisp, well-isolated motion families.
  //
  // Stimulative categories: every limb active, one shared amplitude and one
  // shared phase pattern; identity is the slow/fast frequency assignment
  // across limbs. Limbs whose speeds agree between two categories track the
  // whole-clip time offset identically and cancel out of the cross-template
  // distance, so the offset (the dominant raw-space spread) never moves a
  // clip toward a foreign template, yet same-offset clips of different
  // categories sit closer together than same-category clips at distant
  // offsets.
  //
  // Frequencies kept low so speed jitter cannot accumulate enough phase
  // drift to push a clip outside its own template's neighborhood; amplitude
  // is normalized by mask weight so heavy masks don't blow up the radius.
  const std::vector<Real> amp_grid = {0.45, 0.80, 1.15};
  const std::vector<Real> freq_grid = {0.9, 1.2, 1.5};
  std::vector<std::vector<int>> resp_masks = category_masks(spec.k, limb_count, mask_rng);
  std::vector<std::vector<int>> stim_codes = category_masks(spec.k, limb_count, mask_rng);
  std::vector<Real> stim_phase(limb_count);
  for (Real& p : stim_phase) p = param_rng.uniform(0, 2 * std::numbers::pi_v<Real>);
  std::vector<CategoryTemplate> cats(cat_count);
  for (int c = 0; c < spec.k; ++c) {
    cats[c].mask.assign(limb_count, 1);
    cats[c].amplitude = amp_grid[1] * 2.0 / std::sqrt(static_cast<Real>(limb_count));
    cats[c].frequency.resize(limb_count);
    for (int l = 0; l < limb_count; ++l)
      cats[c].frequency[l] = stim_codes[c][l] ? kStimFast : kStimSlow;
    cats[c].limb_phase = stim_phase;
  }
  // Time-shifted renders of the stimulative templates spanning the offset
  // range (with slack for speed drift); responsive templates are placed
  // against these, not just the unshifted poses.
  const Real guard_span = spec.phase_jitter * kStimTimeScale + 0.06;
  std::vector<Mat> guard;
  for (int c = 0; c < spec.k; ++c)
    for (int s = 0; s <= 32; ++s) {
      const Real offset = guard_span * (2 * s / Real(32) - 1);
      guard.push_back(render_limbs(cats[c], pose, spec.t, 1.0, 1.0, 0.0, offset));
    }

  for (int c = spec.k; c < cat_count; ++c) {
    const int j = c - spec.k;
    cats[c].mask = resp_masks[j];
    int weight = 0;
    for (int m : resp_masks[j]) weight += m;
    cats[c].amplitude = amp_grid[j % amp_grid.size()] *
                        2.0 / std::sqrt(static_cast<Real>(std::max(weight, 1)));
    cats[c].frequency.assign(
        limb_count, freq_grid[(j / amp_grid.size()) % freq_grid.size()]);

    std::vector<Real> best_phase;
    Real best_clearance = -1;
    for (int attempt = 0; attempt < 200; ++attempt) {
      std::vector<Real> cand(limb_count);
      for (int l = 0; l < limb_count; ++l)
        cand[l] = param_rng.uniform(0, 2 * std::numbers::pi_v<Real>);
      CategoryTemplate trial = cats[c];
      trial.limb_phase = cand;
      const Mat rendered = render_limbs(trial, pose, spec.t, 1.0, 1.0, 0.0);
      Real clearance = 1e30;
      for (const Mat& g : guard)
        clearance = std::min(clearance, template_distance(rendered, g));
      if (clearance > best_clearance) {
        best_clearance = clearance;
        best_phase = std::move(cand);
      }
      if (best_clearance >= kTemplateFloor) break;
    }
    cats[c].limb_phase = best_phase;
    guard.push_back(render_limbs(cats[c], pose, spec.t, 1.0, 1.0, 0.0));
  }

  SynthCorpus corpus;
  corpus.oracle.topology = spec.topology;
  corpus.oracle.t = spec.t;
  for (int c = 0; c < cat_count; ++c) {
    const bool stim = c < spec.k;
    const std::string name =
        (stim ? "stim_" : "resp_") + pad2(stim ? c : c - spec.k);
    corpus.oracle.categories.push_back(name);
    corpus.oracle.templates.push_back(
        render_limbs(cats[c], pose, spec.t, 1.0, 1.0, 0.0));
  }
  for (int r = 0; r < spec.k; ++r)
    corpus.rules.rules.emplace_back("stim_" + pad2(r), "resp_" + pad2(r));
  corpus.rules.validate();

  for (int c = 0; c < cat_count; ++c) {
    const bool stim = c < spec.k;
    const std::string& name = corpus.oracle.categories[c];
    for (int i = 0; i < spec.per_class; ++i) {
      const Real amp = 1 + spec.amplitude_jitter * (2 * jitter_rng.uniform() - 1);
      const Real speed_span = stim ? spec.speed_jitter * kStimSpeedScale : spec.speed_jitter;
      const Real speed = 1 + speed_span * (2 * jitter_rng.uniform() - 1);
      const Real draw = 2 * jitter_rng.uniform() - 1;
      const Real phase = stim ? 0 : spec.phase_jitter * draw;
      const Real offset = stim ? spec.phase_jitter * kStimTimeScale * draw : 0;
      Mat limbs = render_limbs(cats[c], pose, spec.t, amp, speed, phase, offset);
      corpus.clips.push_back(limbs_to_clip(
          std::move(limbs), spec.topology, lengths, name + "_" + pad2(i), name,
          stim ? Role::stimulative : Role::responsive));
    }
  }
  return corpus;
}

Vec oracle_distances(const ActionClip& clip, const SynthOracle& oracle) {
  if (oracle.templates.empty())
    throw std::invalid_argument("oracle_classify: empty template set");
  ActionClip working = clip;
  if (working.frame_count() != oracle.t) working = resample_temporal(working, oracle.t);
  const Mat limbs = joints_to_limbs(working, oracle.topology).vectors;
  Vec dist(static_cast<int>(oracle.templates.size()));
  for (int c = 0; c < dist.size(); ++c) {
    const Mat& ref = oracle.templates[c];
    if (ref.rows() != limbs.rows() || ref.cols() != limbs.cols())
      throw std::invalid_argument("oracle_classify: template shape mismatch");
    dist(c) = (limbs - ref).squaredNorm() / static_cast<Real>(ref.size());
  }
  return dist;
}

std::string oracle_classify(const ActionClip& clip, const SynthOracle& oracle) {
  const Vec dist = oracle_distances(clip, oracle);
  int best = 0;
  for (int c = 1; c < dist.size(); ++c)
    if (dist(c) < dist(best)) best = c;
  return oracle.categories[static_cast<std::size_t>(best)];
}

}  // namespace iat
