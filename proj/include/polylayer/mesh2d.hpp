#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "polylayer/geometry.hpp"

namespace polylayer {

enum class EdgeTag { dirichlet, neumann };

struct BoundaryEdge {
  int a, b;
  EdgeTag tag;
};

struct TriMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;
  double h = 0;
  // Profile parameters, zero for meshes of other polygons.
  double theta = 0;
  double outlet_length = 0;
  int level = 0;
  // Nodes [0, parent_nodes) coincide with the parent mesh; node parent_nodes + k is the
  // midpoint of midpoint_parents[k].
  int parent_nodes = 0;
  std::vector<std::array<int, 2>> midpoint_parents;
  double min_angle = 0;
  double max_angle = 0;

  double area() const;
  double signed_area(int t) const;
  std::vector<char> dirichlet_nodes() const;
  double tagged_length(EdgeTag tag) const;
};

enum class EndCondition { neumann, dirichlet };

// Structured mesh of the truncated bent strip: a bilinear kite at the corner
// and two outlet rectangles. End cross-sections take the given condition,
// all other sides are Dirichlet.
TriMesh mesh_lshape(const LShapeProfile& profile, double h, EndCondition ends = EndCondition::neumann);

// Axis-aligned rectangle [0, lx] x [0, ly] with nx x ny cells cut by the
// diagonal from lower left to upper right. Side tags: bottom, right, top, left.
TriMesh mesh_rectangle(double lx, double ly, int nx, int ny, const std::array<EdgeTag, 4>& tags);

TriMesh refine(const TriMesh& mesh);

void update_angle_stats(TriMesh& mesh);

// Bucket grid for point location.
class PointLocator {
 public:
  explicit PointLocator(const TriMesh& mesh);
  // Containing triangle and barycentric weights; triangle -1 when outside.
  int locate(const Vec2& p, std::array<double, 3>& bary) const;
  double evaluate(std::span<const double> values, const Vec2& p) const;
  const TriMesh& mesh() const { return mesh_; }

 private:
  const TriMesh& mesh_;
  Vec2 lo_{}, hi_{};
  int nx_ = 1, ny_ = 1;
  double cell_ = 1;
  std::vector<int> start_;
  std::vector<int> items_;
};

bool barycentric(const TriMesh& mesh, int t, const Vec2& p, std::array<double, 3>& bary, double tol);

double evaluate(const TriMesh& mesh, std::span<const double> values, const Vec2& p);

// Integral of u^2 * weight(tau) along the straight segment a -> b, tau = arclength from a.
double segment_quadrature(const TriMesh& mesh, std::span<const double> values, const Vec2& a, const Vec2& b,
                          const std::function<double(double)>& weight);
double segment_quadrature(const PointLocator& locator, std::span<const double> values, const Vec2& a,
                          const Vec2& b, const std::function<double(double)>& weight);

}  // namespace polylayer
