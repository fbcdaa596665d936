#pragma once

#include "iat/types.hpp"

namespace iat {

// Joint coordinates -> unit limb vectors. limb_lengths holds the per-limb
// mean length over frames. Throws on a zero-length limb (degenerate pose).
LimbSequence joints_to_limbs(const ActionClip& clip, const SkeletonTopology& topology);

// Forward kinematics from the root along the topology; every frame uses the
// same limb_lengths so reconstructed limb lengths are constant by construction.
// root_trajectory is T x 3.
ActionClip limbs_to_joints(const LimbSequence& seq, const Vec& limb_lengths,
                           const Mat& root_trajectory);

// Per-joint, per-axis linear interpolation onto a uniform grid that includes
// both endpoints. frames[0] and frames[T_out-1] equal the input endpoints.
ActionClip resample_temporal(const ActionClip& clip, int t_out);

// The flat T x C representation is the limb-vector matrix itself.
inline FlatAction to_flat(const LimbSequence& seq) { return seq.vectors; }

// Reinterpret a generated T x C matrix as limb vectors for the given topology.
LimbSequence from_flat(const FlatAction& flat, const SkeletonTopology& topology);

}  // namespace iat
