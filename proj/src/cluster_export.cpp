#include "lens/cluster_export.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "lens/errors.hpp"
#include "lens/io.hpp"

namespace lens {

const char* sheet_name(Sheet s) {
  switch (s) {
    case Sheet::UpperCap:
      return "upper_cap";
    case Sheet::LowerCap:
      return "lower_cap";
    case Sheet::PlanarAnnulus:
      return "planar_annulus";
  }
  return "unknown";
}

std::vector<CurveState> resample_profile(const LensProfile& profile, int n) {
  if (n < 3) throw std::invalid_argument("resample_profile: need at least three samples");
  if (profile.states.size() < 2 || !(profile.s_bar > 0.0))
    throw DegenerateProfile("resample_profile: profile has no length");

  std::vector<CurveState> pts;
  pts.reserve(profile.states.size() + 1);
  CurveState pole;
  pole.v = profile.a;
  pole.k = -0.5 * profile.a;
  pts.push_back(pole);
  for (const auto& st : profile.states)
    if (st.s > pts.back().s) pts.push_back(st);
  if (pts.size() < 2) throw DegenerateProfile("resample_profile: arclength is not increasing");

  std::vector<CurveState> out(n);
  std::size_t seg = 0;
  for (int j = 0; j < n; ++j) {
    const double s = profile.s_bar * j / (n - 1);
    while (seg + 2 < pts.size() && pts[seg + 1].s < s) ++seg;
    const CurveState& p = pts[seg];
    const CurveState& q = pts[seg + 1];
    const double d = q.s - p.s;
    const double t = std::clamp((s - p.s) / d, 0.0, 1.0);
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    const double g00 = (6 * t2 - 6 * t) / d, g10 = 3 * t2 - 4 * t + 1, g01 = (-6 * t2 + 6 * t) / d, g11 = 3 * t2 - 2 * t;
    CurveState& r = out[j];
    r.s = s;
    r.u = h00 * p.u + h10 * d * p.up + h01 * q.u + h11 * d * q.up;
    r.v = h00 * p.v + h10 * d * p.vp + h01 * q.v + h11 * d * q.vp;
    const double up = g00 * p.u + g10 * p.up + g01 * q.u + g11 * q.up;
    const double vp = g00 * p.v + g10 * p.vp + g01 * q.v + g11 * q.vp;
    const double norm = std::hypot(up, vp);
    r.up = up / norm;
    r.vp = vp / norm;
    r.k = (1 - t) * p.k + t * q.k;
  }
  out.front() = pole;
  CurveState end = profile.states.back();
  end.v = 0.0;
  out.back() = end;
  return out;
}

namespace {

/// Vertex numbering shared by build_cluster and check_cluster.
struct Layout {
  int n_theta, n_s, rings_cap, annulus_rings;
  int upper_pole() const { return 0; }
  int upper(int j, int i) const { return 1 + (j - 1) * n_theta + i % n_theta; }  // j in [1, n_s - 2]
  int junction(int i) const { return 1 + rings_cap * n_theta + i % n_theta; }
  int lower_pole() const { return 1 + (rings_cap + 1) * n_theta; }
  int lower(int j, int i) const { return lower_pole() + 1 + (j - 1) * n_theta + i % n_theta; }
  int annulus(int k, int i) const {  // k in [1, annulus_rings]
    return lower_pole() + 1 + rings_cap * n_theta + (k - 1) * n_theta + i % n_theta;
  }
  int vertex_count() const { return annulus(annulus_rings, 0) + n_theta; }
  // Ring j of a cap, with j = n_s - 1 the junction.
  int cap(bool upper_cap, int j, int i) const {
    if (j == n_s - 1) return junction(i);
    return upper_cap ? upper(j, i) : lower(j, i);
  }
};

Layout layout_of(const ClusterMesh& m) { return {m.n_theta, m.n_s, m.n_s - 2, m.annulus_rings}; }

double angle_deg(Eigen::Vector3d p, Eigen::Vector3d q) {
  const double c = std::clamp(p.normalized().dot(q.normalized()), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

}  // namespace

ClusterMesh build_cluster(const LensProfile& profile, const ClusterOptions& opt) {
  if (opt.n_theta < 16) throw std::invalid_argument("build_cluster: n_theta must be at least 16");
  if (opt.n_s < 4) throw std::invalid_argument("build_cluster: n_s must be at least 4");
  if (opt.annulus_rings < 1) throw std::invalid_argument("build_cluster: annulus_rings must be positive");
  if (!(profile.xi > 0.0) || !std::isfinite(profile.xi)) throw DegenerateProfile("build_cluster: junction radius is not positive");
  const double outer = opt.annulus_outer > 0.0 ? opt.annulus_outer : 3.0 * profile.xi;
  if (!(outer > profile.xi)) throw std::invalid_argument("build_cluster: annulus_outer must exceed the junction radius");

  const std::vector<CurveState> ring = resample_profile(profile, opt.n_s);
  for (int j = 1; j < opt.n_s; ++j) {
    if (!(ring[j].u > 0.0)) throw DegenerateProfile("build_cluster: profile touches the axis away from the pole");
    if (j < opt.n_s - 1 && !(ring[j].v > 0.0)) throw DegenerateProfile("build_cluster: profile crosses the plane early");
  }

  ClusterMesh m;
  m.a = profile.a;
  m.xi = profile.xi;
  m.s_bar = profile.s_bar;
  m.annulus_outer = outer;
  m.n_theta = opt.n_theta;
  m.n_s = opt.n_s;
  m.annulus_rings = opt.annulus_rings;
  m.terminal_tangent = {profile.terminal().up, profile.terminal().vp};
  const Layout L = layout_of(m);
  const int nt = opt.n_theta;

  Eigen::VectorXd cs(nt), sn(nt);
  for (int i = 0; i < nt; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / nt;
    cs(i) = std::cos(phi);
    sn(i) = std::sin(phi);
  }

  m.V.resize(L.vertex_count(), 3);
  m.V.row(L.upper_pole()) << 0.0, 0.0, profile.a;
  m.V.row(L.lower_pole()) << 0.0, 0.0, -profile.a;
  m.upper_cap_vertices.push_back(L.upper_pole());
  m.lower_cap_vertices.push_back(L.lower_pole());
  for (int j = 1; j <= opt.n_s - 2; ++j) {
    for (int i = 0; i < nt; ++i) {
      m.V.row(L.upper(j, i)) << ring[j].u * cs(i), ring[j].u * sn(i), ring[j].v;
      m.V.row(L.lower(j, i)) << ring[j].u * cs(i), ring[j].u * sn(i), -ring[j].v;
      m.upper_cap_vertices.push_back(L.upper(j, i));
      m.lower_cap_vertices.push_back(L.lower(j, i));
    }
  }
  for (int i = 0; i < nt; ++i) {
    m.V.row(L.junction(i)) << profile.xi * cs(i), profile.xi * sn(i), 0.0;
    m.junction.push_back(L.junction(i));
  }
  for (int k = 1; k <= opt.annulus_rings; ++k) {
    const double r = profile.xi + (outer - profile.xi) * k / opt.annulus_rings;
    for (int i = 0; i < nt; ++i) m.V.row(L.annulus(k, i)) << r * cs(i), r * sn(i), 0.0;
  }

  std::vector<Eigen::Vector3i> tris;
  const auto add = [&](Sheet s, int p, int q, int r) {
    tris.emplace_back(p, q, r);
    m.sheet.push_back(s);
  };
  for (const bool upper : {true, false}) {
    const Sheet s = upper ? Sheet::UpperCap : Sheet::LowerCap;
    // Reflection reverses orientation; swapping two corners restores the outward normal.
    const auto emit = [&](int p, int q, int r) { upper ? add(s, p, q, r) : add(s, p, r, q); };
    const int pole = upper ? L.upper_pole() : L.lower_pole();
    for (int i = 0; i < nt; ++i) emit(pole, L.cap(upper, 1, i), L.cap(upper, 1, i + 1));
    for (int j = 1; j < opt.n_s - 1; ++j) {
      for (int i = 0; i < nt; ++i) {
        const int a0 = L.cap(upper, j, i), a1 = L.cap(upper, j, i + 1);
        const int b0 = L.cap(upper, j + 1, i), b1 = L.cap(upper, j + 1, i + 1);
        emit(a0, b0, b1);
        emit(a0, b1, a1);
      }
    }
  }
  for (int k = 0; k < opt.annulus_rings; ++k) {
    for (int i = 0; i < nt; ++i) {
      const int a0 = k == 0 ? L.junction(i) : L.annulus(k, i);
      const int a1 = k == 0 ? L.junction(i + 1) : L.annulus(k, i + 1);
      const int b0 = L.annulus(k + 1, i), b1 = L.annulus(k + 1, i + 1);
      add(Sheet::PlanarAnnulus, a0, b0, b1);
      add(Sheet::PlanarAnnulus, a0, b1, a1);
    }
  }
  m.F.resize(static_cast<Eigen::Index>(tris.size()), 3);
  for (std::size_t t = 0; t < tris.size(); ++t) m.F.row(static_cast<Eigen::Index>(t)) = tris[t].transpose();
  return m;
}

MeshReport check_cluster(const ClusterMesh& m) {
  MeshReport r;
  const Layout L = layout_of(m);

  r.reflection_symmetric = m.upper_cap_vertices.size() == m.lower_cap_vertices.size();
  for (std::size_t i = 0; r.reflection_symmetric && i < m.upper_cap_vertices.size(); ++i) {
    const auto p = m.V.row(m.upper_cap_vertices[i]);
    const auto q = m.V.row(m.lower_cap_vertices[i]);
    r.reflection_symmetric = p(0) == q(0) && p(1) == q(1) && p(2) == -q(2);
  }

  // Sheets touching each junction vertex, and triangles per sheet on each junction edge.
  std::vector<int> on_junction(m.V.rows(), -1);
  for (std::size_t i = 0; i < m.junction.size(); ++i) on_junction[m.junction[i]] = static_cast<int>(i);
  const std::size_t nj = m.junction.size();
  std::vector<unsigned> sheets_at(nj, 0);
  std::vector<std::array<int, 3>> edge_use(nj, {0, 0, 0});

  const double diag2 = (m.V.colwise().maxCoeff() - m.V.colwise().minCoeff()).squaredNorm();
  r.min_area_ratio = std::numeric_limits<double>::infinity();
  r.worst_orientation = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < m.F.rows(); ++t) {
    const Eigen::Vector3d A = m.V.row(m.F(t, 0)), B = m.V.row(m.F(t, 1)), C = m.V.row(m.F(t, 2));
    const Eigen::Vector3d n = (B - A).cross(C - A);
    r.min_area_ratio = std::min(r.min_area_ratio, 0.5 * n.norm() / diag2);
    const Sheet s = m.sheet[t];
    const Eigen::Vector3d ref = s == Sheet::PlanarAnnulus ? Eigen::Vector3d::UnitZ() : ((A + B + C) / 3.0).normalized();
    r.worst_orientation = std::min(r.worst_orientation, n.normalized().dot(ref));
    for (int c = 0; c < 3; ++c) {
      const int v0 = on_junction[m.F(t, c)], v1 = on_junction[m.F(t, (c + 1) % 3)];
      if (v0 >= 0) sheets_at[v0] |= 1u << static_cast<int>(s);
      if (v0 >= 0 && v1 >= 0) {
        const std::size_t lo = (static_cast<std::size_t>(v0 + 1) % nj == static_cast<std::size_t>(v1)) ? v0 : v1;
        ++edge_use[lo][static_cast<int>(s)];
      }
    }
  }
  r.junction_coherent = nj == static_cast<std::size_t>(m.n_theta);
  for (std::size_t i = 0; r.junction_coherent && i < nj; ++i)
    r.junction_coherent = sheets_at[i] == 7u && edge_use[i] == std::array<int, 3>{1, 1, 1};
  r.oriented = r.worst_orientation > 0.0;
  r.nondegenerate = r.min_area_ratio > 1e-12;

  r.cap_radius_min = std::numeric_limits<double>::infinity();
  r.cap_radius_max = 0.0;
  for (const auto& list : {m.upper_cap_vertices, m.lower_cap_vertices, m.junction}) {
    for (int v : list) {
      const double rad = m.V.row(v).norm();
      r.cap_radius_min = std::min(r.cap_radius_min, rad);
      r.cap_radius_max = std::max(r.cap_radius_max, rad);
    }
  }

  const double up = m.terminal_tangent(0), vp = m.terminal_tangent(1);
  const Eigen::Vector3d d_up(-up, 0.0, -vp), d_low(-up, 0.0, vp), d_plane = Eigen::Vector3d::UnitX();
  r.from_profile = {angle_deg(d_up, d_low), angle_deg(d_up, d_plane), angle_deg(d_low, d_plane),
                    std::atan2(std::abs(vp), std::abs(up)) * 180.0 / std::numbers::pi};

  // Backward one-sided second-order differences along the rings at phi = 0.
  const Eigen::Vector3d J = m.V.row(L.junction(0));
  const auto backward = [&](bool upper) -> Eigen::Vector3d {
    const Eigen::Vector3d p1 = m.V.row(L.cap(upper, m.n_s - 2, 0));
    const Eigen::Vector3d p2 = m.n_s - 3 >= 1 ? Eigen::Vector3d(m.V.row(L.cap(upper, m.n_s - 3, 0)))
                                              : Eigen::Vector3d(m.V.row(upper ? L.upper_pole() : L.lower_pole()));
    return -3.0 * J + 4.0 * p1 - p2;
  };
  const Eigen::Vector3d m_up = backward(true), m_low = backward(false);
  const Eigen::Vector3d m_plane = Eigen::Vector3d(m.V.row(L.annulus(1, 0))) - J;
  r.from_mesh = {angle_deg(m_up, m_low), angle_deg(m_up, m_plane), angle_deg(m_low, m_plane),
                 90.0 - angle_deg(m_up, Eigen::Vector3d::UnitZ())};
  return r;
}

double shrinker_residual_on_curve(const LensProfile& profile) {
  double worst = 0.0;
  for (const auto& st : profile.states) worst = std::max(worst, std::abs(shrinker_residual(st)));
  return worst;
}

void write_obj(std::ostream& os, const ClusterMesh& m) {
  os << "o lens_cluster\n";
  for (Eigen::Index i = 0; i < m.V.rows(); ++i)
    os << "v " << format17(m.V(i, 0)) << ' ' << format17(m.V(i, 1)) << ' ' << format17(m.V(i, 2)) << '\n';
  Sheet current = Sheet::PlanarAnnulus;
  for (Eigen::Index t = 0; t < m.F.rows(); ++t) {
    if (t == 0 || m.sheet[t] != current) {
      current = m.sheet[t];
      os << "g " << sheet_name(current) << '\n';
    }
    os << "f " << m.F(t, 0) + 1 << ' ' << m.F(t, 1) + 1 << ' ' << m.F(t, 2) + 1 << '\n';
  }
}

namespace {

nlohmann::json angles_to_json(const JunctionAngles& a) {
  return {{"cap_cap", a.cap_cap}, {"upper_plane", a.upper_plane}, {"lower_plane", a.lower_plane}, {"cap_tilt", a.cap_tilt}};
}

}  // namespace

nlohmann::json mesh_report_to_json(const MeshReport& r) {
  return {{"valid", r.valid()},
          {"reflection_symmetric", r.reflection_symmetric},
          {"junction_coherent", r.junction_coherent},
          {"oriented", r.oriented},
          {"nondegenerate", r.nondegenerate},
          {"min_area_ratio", r.min_area_ratio},
          {"worst_orientation", r.worst_orientation},
          {"cap_radius_min", r.cap_radius_min},
          {"cap_radius_max", r.cap_radius_max},
          {"junction_angles_deg", {{"profile", angles_to_json(r.from_profile)}, {"mesh", angles_to_json(r.from_mesh)}}}};
}

nlohmann::json cluster_metadata_json(const ClusterMesh& m, const MeshReport& r) {
  return {{"a_star", m.a},
          {"xi", m.xi},
          {"s_bar", m.s_bar},
          {"n_theta", m.n_theta},
          {"n_s", m.n_s},
          {"annulus_outer", m.annulus_outer},
          {"annulus_rings", m.annulus_rings},
          {"planar_sheet_truncated_at", m.annulus_outer},
          {"vertices", m.V.rows()},
          {"triangles", m.F.rows()},
          {"checks", mesh_report_to_json(r)}};
}

}  // namespace lens
