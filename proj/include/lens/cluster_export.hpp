#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

#include "lens/arclength_curve.hpp"

namespace lens {

enum class Sheet : int { UpperCap = 0, LowerCap = 1, PlanarAnnulus = 2 };

const char* sheet_name(Sheet s);

/// Triangle mesh of the three-sheet cluster. Profile (u, v) maps to (u cos phi, u sin phi, v).
struct ClusterMesh {
  Eigen::MatrixX3d V;
  Eigen::Matrix<int, Eigen::Dynamic, 3> F;
  std::vector<Sheet> sheet;  ///< per triangle; triangles are grouped by sheet in this order
  std::vector<int> junction;  ///< junction circle, counterclockwise seen from +z
  std::vector<int> upper_cap_vertices;
  std::vector<int> lower_cap_vertices;  ///< mirror of upper_cap_vertices entry by entry
  double a = 0.0;
  double xi = 0.0;
  double s_bar = 0.0;
  double annulus_outer = 0.0;
  int n_theta = 0;
  int n_s = 0;
  int annulus_rings = 0;
  Eigen::Vector2d terminal_tangent{1.0, 0.0};  ///< (u', v') at the junction
};

struct ClusterOptions {
  int n_theta = 64;
  int n_s = 256;                ///< arclength-uniform samples from the pole to the junction
  double annulus_outer = 0.0;   ///< 0 selects 3 xi
  int annulus_rings = 32;
};

/// Profile resampled at n points uniform in arclength, pole (0, a) first and junction last.
std::vector<CurveState> resample_profile(const LensProfile& profile, int n);

ClusterMesh build_cluster(const LensProfile& profile, const ClusterOptions& opt = {});

struct JunctionAngles {
  double cap_cap = 0.0;      ///< degrees between the two cap half-planes
  double upper_plane = 0.0;  ///< degrees between the upper cap and the annulus
  double lower_plane = 0.0;
  double cap_tilt = 0.0;     ///< degrees between the cap tangent and the plane
};

struct MeshReport {
  bool reflection_symmetric = false;
  bool junction_coherent = false;
  bool oriented = false;
  bool nondegenerate = false;
  double min_area_ratio = 0.0;       ///< min triangle area / bbox diagonal^2
  double worst_orientation = 0.0;    ///< min over triangles of the orientation dot product (normalized)
  JunctionAngles from_profile;       ///< from the terminal tangent
  JunctionAngles from_mesh;          ///< from second-order one-sided differences on the mesh rings
  double cap_radius_min = 0.0;
  double cap_radius_max = 0.0;

  [[nodiscard]] bool valid() const { return reflection_symmetric && junction_coherent && oriented && nondegenerate; }
};

MeshReport check_cluster(const ClusterMesh& mesh);

/// max |k + v'/u - u v' + v u'| over the profile states, with k as stored.
double shrinker_residual_on_curve(const LensProfile& profile);

/// Wavefront OBJ with one group per sheet.
void write_obj(std::ostream& os, const ClusterMesh& mesh);

nlohmann::json mesh_report_to_json(const MeshReport& r);
nlohmann::json cluster_metadata_json(const ClusterMesh& mesh, const MeshReport& r);

}  // namespace lens
