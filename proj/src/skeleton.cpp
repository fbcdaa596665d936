#include "iat/skeleton.hpp"

#include <cmath>
#include <string>

namespace iat {

namespace {
constexpr Real kDegenerateLimb = 1e-12;
}

LimbSequence joints_to_limbs(const ActionClip& clip, const SkeletonTopology& topology) {
  topology.validate();
  if (clip.joint_count() != topology.joint_count)
    throw std::invalid_argument("clip '" + clip.id + "': joint count " +
                                std::to_string(clip.joint_count()) + " != topology " +
                                std::to_string(topology.joint_count));

  const int t_len = clip.frame_count();
  const int limbs = topology.limb_count();
  const auto children = topology.limb_children();

  LimbSequence seq;
  seq.topology = topology;
  seq.vectors.resize(t_len, 3 * limbs);
  seq.limb_lengths = Vec::Zero(limbs);

  for (int t = 0; t < t_len; ++t) {
    for (int l = 0; l < limbs; ++l) {
      const int child = children[l];
      const Vec3 delta = clip.joint(t, child) - clip.joint(t, topology.parent[child]);
      const Real len = delta.norm();
      if (len < kDegenerateLimb)
        throw std::invalid_argument("clip '" + clip.id + "': degenerate limb " +
                                    std::to_string(l) + " at frame " + std::to_string(t));
      seq.vectors.block<1, 3>(t, 3 * l) = (delta / len).transpose();
      seq.limb_lengths[l] += len;
    }
  }
  seq.limb_lengths /= static_cast<Real>(t_len);
  return seq;
}

ActionClip limbs_to_joints(const LimbSequence& seq, const Vec& limb_lengths,
                           const Mat& root_trajectory) {
  const auto& topology = seq.topology;
  topology.validate();
  const int t_len = seq.frame_count();
  const int limbs = seq.limb_count();
  if (limbs != topology.limb_count())
    throw std::invalid_argument("limb sequence width does not match topology");
  if (limb_lengths.size() != limbs)
    throw std::invalid_argument("limb_lengths size != limb count");
  if ((limb_lengths.array() <= 0).any())
    throw std::invalid_argument("limb_lengths must be positive");
  if (root_trajectory.rows() != t_len || root_trajectory.cols() != 3)
    throw std::invalid_argument("root_trajectory must be T x 3");

  const auto children = topology.limb_children();
  std::vector<int> limb_of_child(topology.joint_count, -1);
  for (int l = 0; l < limbs; ++l) limb_of_child[children[l]] = l;

  // process joints so each parent is placed before its children
  std::vector<int> order;
  order.reserve(topology.joint_count);
  order.push_back(topology.root());
  for (size_t k = 0; k < order.size(); ++k)
    for (int j = 0; j < topology.joint_count; ++j)
      if (topology.parent[j] == order[k]) order.push_back(j);

  ActionClip clip;
  clip.frames.resize(t_len, 3 * topology.joint_count);
  for (int t = 0; t < t_len; ++t) {
    clip.set_joint(t, topology.root(), root_trajectory.row(t).transpose());
    for (size_t k = 1; k < order.size(); ++k) {
      const int j = order[k];
      const int l = limb_of_child[j];
      const Vec3 dir = seq.vectors.block<1, 3>(t, 3 * l).transpose();
      clip.set_joint(t, j, clip.joint(t, topology.parent[j]) + limb_lengths[l] * dir);
    }
  }
  return clip;
}

ActionClip resample_temporal(const ActionClip& clip, int t_out) {
  clip.validate();
  if (t_out < 2) throw std::invalid_argument("resample_temporal: T_out must be >= 2");

  const int t_in = clip.frame_count();
  ActionClip out = clip;
  if (t_out == t_in) return out;  // identity, bit-exact

  out.frames.resize(t_out, clip.frames.cols());
  const Real step = static_cast<Real>(t_in - 1) / static_cast<Real>(t_out - 1);
  for (int i = 0; i < t_out; ++i) {
    const Real u = (i == t_out - 1) ? static_cast<Real>(t_in - 1) : i * step;
    const int lo = static_cast<int>(std::floor(u));
    const int hi = std::min(lo + 1, t_in - 1);
    const Real w = u - lo;
    out.frames.row(i) = (1.0 - w) * clip.frames.row(lo) + w * clip.frames.row(hi);
  }
  // endpoints bit-equal to the input endpoints
  out.frames.row(0) = clip.frames.row(0);
  out.frames.row(t_out - 1) = clip.frames.row(t_in - 1);
  return out;
}

LimbSequence from_flat(const FlatAction& flat, const SkeletonTopology& topology) {
  topology.validate();
  if (flat.cols() != 3 * topology.limb_count())
    throw std::invalid_argument("flat action width != 3 * limb count");
  LimbSequence seq;
  seq.topology = topology;
  seq.vectors = flat;
  seq.limb_lengths = Vec::Ones(topology.limb_count());
  return seq;
}

}  // namespace iat
