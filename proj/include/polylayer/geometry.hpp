#pragma once

#include <array>
#include <vector>

#include "polylayer/vecmath.hpp"

namespace polylayer {

// Convex polyhedral cone with apex at the origin.
// Face j is spanned by rays j and j+1 (indices mod n); normals point into the cone.
// Vertex angle j is the opening of face j; dihedral angle j sits at ray j,
// between faces j-1 and j.
struct PolyhedralAngle {
  std::vector<Vec3> rays;
  std::vector<Vec3> normals;
  std::vector<double> vertex_angles;
  std::vector<double> dihedral_angles;

  int faces() const { return static_cast<int>(rays.size()); }
};

// Rays r0 = e_x, r1 in the xy-plane, r2 with positive z.
PolyhedralAngle build_trihedral(const std::array<double, 3>& alpha);
// n rays on a circular cone around e_z, first ray in the xz-plane.
PolyhedralAngle build_regular(int n, double alpha);
// General convex cone from (not necessarily unit) rays in cyclic order.
PolyhedralAngle angle_from_rays(std::vector<Vec3> rays);

// Dihedral angle at the apex of a spherical triangle from its three sides,
// for the vertex between sides a and b (c opposite).
double spherical_dihedral(double a, double b, double c);

// Orthonormal frame attached to an edge of the layer.
// Origin: inner vertex t. e3 along the edge ray, e1 in the preceding face
// pointing away from the edge, e2 = inward normal of that face.
struct DihedralFrame {
  Vec3 origin;
  Vec3 e1, e2, e3;
  Vec3 to_local(const Vec3& x) const;
  Vec3 to_global(const Vec3& local) const;
};

struct Plane {
  Vec3 normal;  // unit
  double offset;
  double signed_distance(const Vec3& x) const { return dot(normal, x) - offset; }
};

class LayerGeometry {
 public:
  const PolyhedralAngle& angle() const { return angle_; }
  const Vec3& shift() const { return shift_; }
  double beta_min() const { return beta_min_; }
  int beta_min_edge() const { return beta_min_edge_; }
  double inscribed_ball_residual() const { return residual_; }
  // Plane j bisects face j; its normal points toward ray j+1.
  const std::vector<Plane>& partition_planes() const { return planes_; }

  bool contains(const Vec3& x) const;
  // min_i n_i.x; equals the distance to the outer boundary for interior x.
  double outer_distance(const Vec3& x) const;
  DihedralFrame frame(int edge) const;
  // Pieces of the partition containing x (closed half-space tests, tolerance tol).
  std::vector<int> partition_pieces(const Vec3& x, double tol = 0.0) const;

  friend LayerGeometry make_layer(const PolyhedralAngle& angle);

 private:
  PolyhedralAngle angle_;
  Vec3 shift_{};
  double beta_min_ = 0;
  int beta_min_edge_ = 0;
  double residual_ = 0;
  std::vector<Plane> planes_;
};

LayerGeometry make_layer(const PolyhedralAngle& angle);

// Bent strip of unit width, opening angle theta, outlets of length R from the inner vertex.
// Coordinates: outer vertex at the origin, bisector along +x.
// Vertices in counterclockwise order:
//   0 outer vertex O', 1 outer end of arm 1, 2 inner end of arm 1,
//   3 inner vertex O, 4 inner end of arm 2, 5 outer end of arm 2.
// Side k joins vertex k and k+1.
enum class SideKind { outer, inner, cross_section };

struct LShapeProfile {
  double theta = 0;
  double outlet_length = 0;
  std::array<Vec2, 6> vertices{};
  std::array<SideKind, 6> sides{};
  std::array<Vec2, 2> feet{};        // feet of the perpendiculars from O to the outer rays
  std::array<Vec2, 2> directions{};  // unit outer-ray directions d1, d2
  std::array<Vec2, 2> normals{};     // inward unit normals of the outer rays

  const Vec2& outer_vertex() const { return vertices[0]; }
  const Vec2& inner_vertex() const { return vertices[3]; }
  double area() const;
  bool contains(const Vec2& p, double tol = 0.0) const;
  // Distance along arm k measured from the cross-section through O (negative inside the corner).
  double outlet_coordinate(int arm, const Vec2& p) const;
};

LShapeProfile lshape_profile(double theta, double R);

// Map from frame-local (x, y) of an edge cross-section to profile coordinates.
Vec2 frame_to_profile(const LShapeProfile& profile, const LayerGeometry& layer, int edge, const Vec2& local);

enum class ThinTrihedralRegion { upper = 1, wedge = 2, rest = 3 };

// Three-piece split of a (pi/2, alpha, pi/2) trihedral layer, in the frame of its sharpest edge.
ThinTrihedralRegion classify_thin_trihedral(const LayerGeometry& layer, const Vec3& x);
bool is_thin_trihedral(const LayerGeometry& layer);

}  // namespace polylayer
