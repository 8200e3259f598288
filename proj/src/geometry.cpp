#include "polylayer/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "polylayer/errors.hpp"

namespace polylayer {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

double spherical_dihedral(double a, double b, double c) {
  double cb = (std::cos(c) - std::cos(a) * std::cos(b)) / (std::sin(a) * std::sin(b));
  return std::acos(std::clamp(cb, -1.0, 1.0));
}

PolyhedralAngle angle_from_rays(std::vector<Vec3> rays) {
  const int n = static_cast<int>(rays.size());
  if (n < 3) throw InvalidInput("polyhedral angle needs at least 3 rays");
  Vec3 centre{0, 0, 0};
  for (auto& r : rays) {
    double len = norm(r);
    if (!(len > 0)) throw InvalidInput("zero ray direction");
    r = (1.0 / len) * r;
    centre = centre + r;
  }
  if (norm(centre) < 1e-12) throw InvalidInput("rays do not bound a solid cone");

  PolyhedralAngle a;
  a.rays = rays;
  int orientation = 0;
  for (int j = 0; j < n; ++j) {
    Vec3 c = cross(rays[j], rays[(j + 1) % n]);
    double len = norm(c);
    if (len < 1e-14) throw InvalidInput("adjacent rays are parallel at face " + std::to_string(j));
    int sgn = dot(c, centre) > 0 ? 1 : -1;
    if (orientation == 0) orientation = sgn;
    if (sgn != orientation) throw InvalidInput("rays are not in cyclic order around the cone");
    a.normals.push_back((sgn / len) * c);
  }
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (k == j || k == (j + 1) % n) continue;
      if (dot(a.normals[j], rays[k]) <= 1e-12)
        throw InvalidInput("cone is not convex: ray " + std::to_string(k) + " violates face " +
                           std::to_string(j));
    }
  }
  Vec3 interior = normalized(centre);
  for (const auto& nv : a.normals) {
    if (dot(nv, interior) <= 0) throw InvalidInput("cone is not solid");
  }
  for (int j = 0; j < n; ++j) {
    a.vertex_angles.push_back(angle_between(rays[j], rays[(j + 1) % n]));
    const Vec3& prev = a.normals[(j + n - 1) % n];
    a.dihedral_angles.push_back(std::acos(std::clamp(-dot(prev, a.normals[j]), -1.0, 1.0)));
  }
  return a;
}

PolyhedralAngle build_trihedral(const std::array<double, 3>& alpha) {
  for (int j = 0; j < 3; ++j) {
    if (!(alpha[j] > 0 && alpha[j] < kPi))
      throw InvalidInput("vertex angle alpha[" + std::to_string(j) + "] = " + fmt(alpha[j]) +
                         " outside (0, pi)");
  }
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3, k = (i + 2) % 3;
    if (!(alpha[i] < alpha[j] + alpha[k]))
      throw InvalidInput("spherical triangle inequality violated: alpha[" + std::to_string(i) +
                         "] < alpha[" + std::to_string(j) + "] + alpha[" + std::to_string(k) + "]");
  }
  if (!(alpha[0] + alpha[1] + alpha[2] < 2 * kPi))
    throw InvalidInput("spherical triangle inequality violated: alpha[0] + alpha[1] + alpha[2] < 2 pi");

  const double c0 = std::cos(alpha[0]), s0 = std::sin(alpha[0]);
  const double c1 = std::cos(alpha[1]), c2 = std::cos(alpha[2]);
  Vec3 r0{1, 0, 0};
  Vec3 r1{c0, s0, 0};
  double y = (c1 - c0 * c2) / s0;
  double z2 = 1 - c2 * c2 - y * y;
  if (!(z2 > 0)) throw InvalidInput("degenerate trihedral angle (coplanar rays)");
  Vec3 r2{c2, y, std::sqrt(z2)};

  PolyhedralAngle a = angle_from_rays({r0, r1, r2});
  for (int j = 0; j < 3; ++j) {
    double ref = spherical_dihedral(alpha[(j + 2) % 3], alpha[j], alpha[(j + 1) % 3]);
    if (std::abs(ref - a.dihedral_angles[j]) > 1e-10)
      throw std::logic_error("dihedral angle disagrees with the spherical law of cosines");
  }
  return a;
}

PolyhedralAngle build_regular(int n, double alpha) {
  if (n < 3) throw InvalidInput("regular angle needs n >= 3 faces");
  const double bound = 2 * kPi / n;
  if (!(alpha > 0 && alpha < bound))
    throw InvalidInput("regular " + std::to_string(n) + "-gonal angle requires 0 < alpha < 2 pi / n = " +
                       fmt(bound) + ", got " + fmt(alpha));
  double s2 = (1 - std::cos(alpha)) / (1 - std::cos(bound));
  double sphi = std::sqrt(s2), cphi = std::sqrt(1 - s2);
  std::vector<Vec3> rays;
  for (int j = 0; j < n; ++j) {
    double psi = bound * j;
    rays.push_back({sphi * std::cos(psi), sphi * std::sin(psi), cphi});
  }
  return angle_from_rays(std::move(rays));
}

Vec3 DihedralFrame::to_local(const Vec3& x) const {
  Vec3 d = x - origin;
  return {dot(e1, d), dot(e2, d), dot(e3, d)};
}

Vec3 DihedralFrame::to_global(const Vec3& l) const {
  return origin + l[0] * e1 + l[1] * e2 + l[2] * e3;
}

LayerGeometry make_layer(const PolyhedralAngle& angle) {
  const int n = angle.faces();
  Eigen::MatrixXd N(n, 3);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) N(i, k) = angle.normals[i][k];
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::Vector3d t = N.colPivHouseholderQr().solve(ones);
  double residual = (N * t - ones).norm();
  if (residual > 1e-8)
    throw InvalidInput("not inscribed-ball; out of scope (shift residual " + fmt(residual) + ")");

  LayerGeometry layer;
  layer.angle_ = angle;
  layer.shift_ = {t[0], t[1], t[2]};
  layer.residual_ = residual;
  auto it = std::min_element(angle.dihedral_angles.begin(), angle.dihedral_angles.end());
  layer.beta_min_ = *it;
  layer.beta_min_edge_ = static_cast<int>(it - angle.dihedral_angles.begin());
  for (int j = 0; j < n; ++j) {
    const Vec3& a = angle.rays[j];
    const Vec3& b = angle.rays[(j + 1) % n];
    Vec3 bis = normalized(a + b);
    Vec3 m = normalized(cross(bis, angle.normals[j]));
    if (dot(m, b) < 0) m = -1.0 * m;
    layer.planes_.push_back({m, dot(m, layer.shift_)});
  }
  return layer;
}

bool LayerGeometry::contains(const Vec3& x) const {
  double lo = 1e300;
  for (const auto& nv : angle_.normals) {
    double d = dot(nv, x);
    if (!(d > 0)) return false;
    lo = std::min(lo, d);
  }
  return lo < 1;
}

double LayerGeometry::outer_distance(const Vec3& x) const {
  double lo = 1e300;
  for (const auto& nv : angle_.normals) lo = std::min(lo, dot(nv, x));
  return lo;
}

DihedralFrame LayerGeometry::frame(int edge) const {
  const int n = angle_.faces();
  if (edge < 0 || edge >= n) throw InvalidInput("edge index out of range");
  const Vec3& r = angle_.rays[edge];
  const Vec3& prev = angle_.rays[(edge + n - 1) % n];
  DihedralFrame f;
  f.origin = shift_;
  f.e3 = r;
  f.e1 = normalized(prev - dot(prev, r) * r);
  f.e2 = angle_.normals[(edge + n - 1) % n];
  return f;
}

std::vector<int> LayerGeometry::partition_pieces(const Vec3& x, double tol) const {
  const int n = angle_.faces();
  std::vector<int> out;
  for (int j = 0; j < n; ++j) {
    const Plane& before = planes_[(j + n - 1) % n];
    const Plane& after = planes_[j];
    if (before.signed_distance(x) >= -tol && after.signed_distance(x) <= tol) out.push_back(j);
  }
  return out;
}

double LShapeProfile::area() const {
  double a = 0;
  for (int k = 0; k < 6; ++k) a += cross(vertices[k], vertices[(k + 1) % 6]);
  return 0.5 * a;
}

double LShapeProfile::outlet_coordinate(int arm, const Vec2& p) const {
  return dot(p - inner_vertex(), directions[arm]);
}

bool LShapeProfile::contains(const Vec2& p, double tol) const {
  double a = dot(normals[0], p), b = dot(normals[1], p);
  if (a < -tol || b < -tol) return false;
  if (std::min(a, b) > 1 + tol) return false;
  return outlet_coordinate(0, p) <= outlet_length + tol && outlet_coordinate(1, p) <= outlet_length + tol;
}

LShapeProfile lshape_profile(double theta, double R) {
  if (!(theta > 0 && theta < kPi)) throw InvalidInput("opening angle theta must lie in (0, pi), got " + fmt(theta));
  if (!(R > 0)) throw InvalidInput("outlet length R must be positive");
  const double c = std::cos(theta / 2), s = std::sin(theta / 2), cot = c / s;
  LShapeProfile p;
  p.theta = theta;
  p.outlet_length = R;
  p.directions = {Vec2{c, -s}, Vec2{c, s}};
  p.normals = {Vec2{s, c}, Vec2{s, -c}};
  p.feet = {cot * p.directions[0], cot * p.directions[1]};
  Vec2 O{1 / s, 0};
  p.vertices = {Vec2{0, 0}, (cot + R) * p.directions[0], O + R * p.directions[0], O,
                O + R * p.directions[1], (cot + R) * p.directions[1]};
  p.sides = {SideKind::outer, SideKind::cross_section, SideKind::inner,
             SideKind::inner, SideKind::cross_section, SideKind::outer};
  return p;
}

Vec2 frame_to_profile(const LShapeProfile& profile, const LayerGeometry& layer, int edge, const Vec2& local) {
  DihedralFrame f = layer.frame(edge);
  Vec3 apex = f.to_local({0, 0, 0});
  double x = local[0] - apex[0], y = local[1] - apex[1];
  double c = std::cos(profile.theta / 2), s = std::sin(profile.theta / 2);
  return {x * c + y * s, -x * s + y * c};
}

bool is_thin_trihedral(const LayerGeometry& layer) {
  const auto& a = layer.angle();
  if (a.faces() != 3) return false;
  return std::abs(a.vertex_angles[0] - kPi / 2) < 1e-9 && std::abs(a.vertex_angles[2] - kPi / 2) < 1e-9;
}

ThinTrihedralRegion classify_thin_trihedral(const LayerGeometry& layer, const Vec3& x) {
  if (!is_thin_trihedral(layer)) throw InvalidInput("layer is not a (pi/2, alpha, pi/2) trihedral layer");
  if (!layer.contains(x)) throw InvalidInput("point outside the layer");
  const double alpha = layer.angle().vertex_angles[1];
  Vec3 l = layer.frame(0).to_local(x);
  if (l[2] > 0) return ThinTrihedralRegion::upper;
  if (l[1] > 0 && std::atan2(l[1], l[0]) < alpha) return ThinTrihedralRegion::wedge;
  return ThinTrihedralRegion::rest;
}

}  // namespace polylayer
