#pragma once

#include "iat/pvae.hpp"
#include "iat/types.hpp"

#include <string>
#include <vector>

namespace iat::plots {

// Stick-figure grid: one row per clip, samples_per_clip evenly spaced frames
// per row, orthographic x/z projection. Deterministic output bytes.
void render_skeleton_grid(const std::vector<ActionClip>& clips,
                          const SkeletonTopology& topology, int samples_per_clip,
                          const std::string& out_path);

// Scatter of the first two embedding dimensions colored by label, with a
// legend. Returns the silhouette of the labeling, which is also written into
// the plot caption. embeddings: (d x N), d >= 2.
Real plot_embeddings(const Mat& embeddings, const std::vector<std::string>& labels,
                     const std::string& out_path);

struct FrCurvePoint {
  std::string axis;  // "s" or "d"
  Real value = 0;    // the grid coordinate
  Real f = 0;
  Real r = 0;
};

// F/R of the stimulative confidence matrix swept over the scale grid (at the
// result's fitted dimension) and over the dimension grid (at s_fixed).
// Writes an SVG with one panel per sweep and a JSON table of every point
// alongside it at out_path + ".json".
std::vector<FrCurvePoint> plot_fr_curves(const pvae::PvaeResult& trained,
                                         const std::vector<std::string>& stim_labels,
                                         const std::vector<Real>& s_grid,
                                         const std::vector<int>& d_grid, Real s_fixed,
                                         const std::string& out_path);

}  // namespace iat::plots
