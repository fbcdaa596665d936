#include "iat/plots.hpp"

#include "iat/clustering.hpp"
#include "iat/pe.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace iat::plots {
namespace {

const char* kPalette[10] = {"#4269d0", "#efb118", "#ff725c", "#6cc5b0", "#3ca951",
                            "#ff8ab7", "#a463f2", "#97bbf5", "#9c6b4e", "#9498a0"};

std::string num(Real v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string num_g(Real v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void write_file(const std::string& body, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("plot: cannot write " + path);
  out << body;
  if (!out) throw std::runtime_error("plot: write failure on " + path);
}

std::string svg_open(int w, int h) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
    << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
  return s.str();
}

void svg_line(std::ostringstream& s, Real x1, Real y1, Real x2, Real y2,
              const char* color, Real width) {
  s << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
    << "\" y2=\"" << num(y2) << "\" stroke=\"" << color << "\" stroke-width=\""
    << num(width) << "\"/>\n";
}

void svg_circle(std::ostringstream& s, Real cx, Real cy, Real r, const char* color) {
  s << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
    << "\" fill=\"" << color << "\"/>\n";
}

void svg_text(std::ostringstream& s, Real x, Real y, const std::string& body,
              int size = 11, const char* color = "#333333") {
  s << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\""
    << " font-size=\"" << size << "\" fill=\"" << color << "\">" << body << "</text>\n";
}

// axes plus F/R polylines over an index-spaced grid, y fixed to [0,1]
void fr_panel(std::ostringstream& s, Real ox, Real oy, Real w, Real h,
              const std::string& title, const std::vector<std::string>& ticks,
              const std::vector<Real>& f, const std::vector<Real>& r) {
  svg_line(s, ox, oy + h, ox + w, oy + h, "#333333", 1.0);
  svg_line(s, ox, oy, ox, oy + h, "#333333", 1.0);
  svg_text(s, ox + w / 2 - 30, oy - 8, title, 12);
  for (int g = 0; g <= 4; ++g) {
    const Real y = oy + h - h * g / 4;
    svg_line(s, ox - 3, y, ox, y, "#333333", 1.0);
    svg_text(s, ox - 30, y + 4, num(Real(g) / 4), 9);
  }
  const int n = static_cast<int>(ticks.size());
  auto px = [&](int i) { return n == 1 ? ox + w / 2 : ox + w * i / (n - 1); };
  for (int i = 0; i < n; ++i) {
    svg_line(s, px(i), oy + h, px(i), oy + h + 3, "#333333", 1.0);
    svg_text(s, px(i) - 10, oy + h + 14, ticks[i], 9);
  }
  for (int curve = 0; curve < 2; ++curve) {
    const std::vector<Real>& vals = curve == 0 ? f : r;
    s << "<polyline fill=\"none\" stroke=\"" << (curve == 0 ? "#ff725c" : "#4269d0")
      << "\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i < n; ++i)
      s << num(px(i)) << "," << num(oy + h - h * std::clamp<Real>(vals[i], 0, 1)) << " ";
    s << "\"/>\n";
    for (int i = 0; i < n; ++i)
      svg_circle(s, px(i), oy + h - h * std::clamp<Real>(vals[i], 0, 1), 2.5,
                 curve == 0 ? "#ff725c" : "#4269d0");
  }
  svg_circle(s, ox + w - 52, oy + 8, 3, "#ff725c");
  svg_text(s, ox + w - 44, oy + 12, "F", 10);
  svg_circle(s, ox + w - 24, oy + 8, 3, "#4269d0");
  svg_text(s, ox + w - 16, oy + 12, "R", 10);
}

}  // namespace

void render_skeleton_grid(const std::vector<ActionClip>& clips,
                          const SkeletonTopology& topology, int samples_per_clip,
                          const std::string& out_path) {
  if (clips.empty()) throw std::invalid_argument("skeleton grid: no clips");
  if (samples_per_clip < 1)
    throw std::invalid_argument("skeleton grid: samples_per_clip must be >= 1");
  topology.validate();
  for (const ActionClip& c : clips) {
    c.validate();
    if (c.joint_count() != topology.joint_count)
      throw std::invalid_argument("skeleton grid: clip '" + c.id +
                                  "' does not match the topology");
  }

  // evenly sampled frame indices per clip
  std::vector<std::vector<int>> picks(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const int t = clips[i].frame_count();
    for (int k = 0; k < samples_per_clip; ++k)
      picks[i].push_back(samples_per_clip == 1
                             ? t / 2
                             : static_cast<int>(static_cast<long>(k) * (t - 1) /
                                                (samples_per_clip - 1)));
  }

  // one shared x/z bounding box keeps every cell at the same scale
  Real lo_x = 1e30, hi_x = -1e30, lo_z = 1e30, hi_z = -1e30;
  for (std::size_t i = 0; i < clips.size(); ++i)
    for (int t : picks[i])
      for (int j = 0; j < topology.joint_count; ++j) {
        const Vec3 p = clips[i].joint(t, j);
        lo_x = std::min(lo_x, p.x());
        hi_x = std::max(hi_x, p.x());
        lo_z = std::min(lo_z, p.z());
        hi_z = std::max(hi_z, p.z());
      }
  const Real span = std::max({hi_x - lo_x, hi_z - lo_z, Real(1e-9)});

  const int cell = 120, pad = 14;
  const int w = cell * samples_per_clip, h = cell * static_cast<int>(clips.size());
  std::ostringstream s;
  s << svg_open(w, h);
  const Real scale = (cell - 2 * pad) / span;
  for (std::size_t i = 0; i < clips.size(); ++i)
    for (int k = 0; k < samples_per_clip; ++k) {
      const int t = picks[i][k];
      const Real cx = cell * k + cell / 2.0;
      const Real cy = cell * static_cast<Real>(i) + cell / 2.0;
      auto sx = [&](const Vec3& p) { return cx + (p.x() - (lo_x + hi_x) / 2) * scale; };
      auto sy = [&](const Vec3& p) { return cy - (p.z() - (lo_z + hi_z) / 2) * scale; };
      for (int j = 0; j < topology.joint_count; ++j) {
        if (topology.parent[j] < 0) continue;
        const Vec3 a = clips[i].joint(t, j);
        const Vec3 b = clips[i].joint(t, topology.parent[j]);
        svg_line(s, sx(a), sy(a), sx(b), sy(b), "#445566", 1.5);
      }
      for (int j = 0; j < topology.joint_count; ++j) {
        const Vec3 p = clips[i].joint(t, j);
        svg_circle(s, sx(p), sy(p), 2.0, "#223344");
      }
    }
  for (std::size_t i = 0; i < clips.size(); ++i)
    svg_text(s, 4, cell * static_cast<Real>(i) + 12, clips[i].id, 9, "#777777");
  s << "</svg>\n";
  write_file(s.str(), out_path);
}

Real plot_embeddings(const Mat& embeddings, const std::vector<std::string>& labels,
                     const std::string& out_path) {
  if (embeddings.cols() < 1) throw std::invalid_argument("embedding plot: no points");
  if (embeddings.rows() < 2)
    throw std::invalid_argument("embedding plot: need at least 2 dimensions");
  if (static_cast<int>(labels.size()) != embeddings.cols())
    throw std::invalid_argument("embedding plot: label count mismatch");

  std::vector<std::string> order(std::set<std::string>(labels.begin(), labels.end()).begin(),
                                 std::set<std::string>(labels.begin(), labels.end()).end());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < order.size(); ++i) index[order[i]] = static_cast<int>(i);

  Real sil = 0;
  if (order.size() >= 2 && embeddings.cols() >= 2) {
    std::vector<int> assignment;
    for (const std::string& l : labels) assignment.push_back(index[l]);
    sil = cluster::silhouette(embeddings, assignment);
  }

  const int w = 520, h = 520, pad = 48;
  Real lo_x = embeddings.row(0).minCoeff(), hi_x = embeddings.row(0).maxCoeff();
  Real lo_y = embeddings.row(1).minCoeff(), hi_y = embeddings.row(1).maxCoeff();
  const Real span_x = std::max(hi_x - lo_x, Real(1e-9));
  const Real span_y = std::max(hi_y - lo_y, Real(1e-9));

  std::ostringstream s;
  s << svg_open(w, h);
  svg_line(s, pad, h - pad, w - pad, h - pad, "#333333", 1.0);
  svg_line(s, pad, pad, pad, h - pad, "#333333", 1.0);
  for (int i = 0; i < embeddings.cols(); ++i) {
    const Real x = pad + (embeddings(0, i) - lo_x) / span_x * (w - 2 * pad);
    const Real y = h - pad - (embeddings(1, i) - lo_y) / span_y * (h - 2 * pad);
    svg_circle(s, x, y, 3.0, kPalette[index[labels[i]] % 10]);
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Real y = pad + 14 * static_cast<Real>(i);
    svg_circle(s, w - pad - 76, y, 4, kPalette[i % 10]);
    svg_text(s, w - pad - 68, y + 4, order[i], 10);
  }
  svg_text(s, pad, h - 16, "silhouette = " + num(sil), 11);
  s << "</svg>\n";
  write_file(s.str(), out_path);
  return sil;
}

std::vector<FrCurvePoint> plot_fr_curves(const pvae::PvaeResult& trained,
                                         const std::vector<std::string>& stim_labels,
                                         const std::vector<Real>& s_grid,
                                         const std::vector<int>& d_grid, Real s_fixed,
                                         const std::string& out_path) {
  if (static_cast<int>(stim_labels.size()) != trained.mu_s.cols())
    throw std::invalid_argument("fr curves: label count mismatch");
  if (s_grid.empty() && d_grid.empty())
    throw std::invalid_argument("fr curves: both grids empty");

  std::vector<FrCurvePoint> rows;
  auto fr_at = [&](const pe::PcaProjection& p, Real s) {
    const Mat emb = pe::project_all(p, trained.mu_s);
    const pe::NcMatrix nc =
        pe::row_normalize(pe::compute_confidence(emb, trained.sigma_s, p, s),
                          Role::stimulative);
    return std::pair<Real, Real>(pe::effectiveness(nc),
                                 pe::reliability(nc, stim_labels));
  };
  for (Real s : s_grid) {
    auto [f, r] = fr_at(trained.p_s, s);
    rows.push_back({"s", s, f, r});
  }
  for (int d : d_grid) {
    auto [f, r] = fr_at(pe::fit_pca(trained.mu_s, d), s_fixed);
    rows.push_back({"d", static_cast<Real>(d), f, r});
  }

  std::ostringstream s;
  s << svg_open(720, 300);
  std::vector<std::string> ticks;
  std::vector<Real> fs, rs;
  for (const FrCurvePoint& p : rows)
    if (p.axis == "s") {
      ticks.push_back(num_g(p.value));
      fs.push_back(p.f);
      rs.push_back(p.r);
    }
  if (!ticks.empty()) fr_panel(s, 60, 40, 260, 200, "scale factor s", ticks, fs, rs);
  ticks.clear();
  fs.clear();
  rs.clear();
  for (const FrCurvePoint& p : rows)
    if (p.axis == "d") {
      ticks.push_back(num_g(p.value));
      fs.push_back(p.f);
      rs.push_back(p.r);
    }
  if (!ticks.empty()) fr_panel(s, 420, 40, 260, 200, "dimension d", ticks, fs, rs);
  s << "</svg>\n";
  write_file(s.str(), out_path);

  nlohmann::json table = nlohmann::json::array();
  for (const FrCurvePoint& p : rows)
    table.push_back({{"axis", p.axis}, {"value", p.value}, {"f", p.f}, {"r", p.r}});
  write_file(table.dump(1, '\t') + "\n", out_path + ".json");
  return rows;
}

}  // namespace iat::plots
